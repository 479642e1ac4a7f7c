"""Bowl-shaped scale-invariant losses L(t), t = estimate / target.

Built-in kinds: ``quadratic`` (t-1)^2, ``entropy`` t - ln t - 1,
``symmetric`` t + 1/t - 2 and ``linex`` exp(a(t-1)) - a(t-1) - 1.
:class:`CustomLoss` plugs any other convex L with L(1) = 0 into the generic
multiplier solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DomainError, ValidationError

KINDS = ("quadratic", "entropy", "symmetric", "linex")
_LABELS = {"quadratic": "L1", "entropy": "L2", "symmetric": "L3", "linex": "L4"}


@dataclass(frozen=True)
class LossSpec:
    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown loss kind {self.kind!r}")
        if self.kind == "linex":
            if self.alpha is None or self.alpha == 0 or not math.isfinite(self.alpha):
                raise ValidationError("linex loss needs a finite nonzero alpha")
        elif self.alpha is not None:
            raise ValidationError(f"alpha is only meaningful for linex, not {self.kind}")

    @property
    def label(self) -> str:
        if self.kind == "linex":
            return f"linex:{self.alpha:g}"
        return self.kind

    @property
    def short(self) -> str:
        return _LABELS[self.kind]

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class CustomLoss:
    """User-supplied loss: ``fn`` and ``deriv`` must accept numpy arrays."""

    name: str
    fn: Callable = field(compare=False)
    deriv: Callable = field(compare=False)
    kind: str = "custom"
    alpha: None = None

    @property
    def label(self) -> str:
        return self.name

    short = label

    def __str__(self):
        return self.name


Loss = Union[LossSpec, CustomLoss]

QUADRATIC = LossSpec("quadratic")
ENTROPY = LossSpec("entropy")
SYMMETRIC = LossSpec("symmetric")
STANDARD_LOSSES = (QUADRATIC, ENTROPY, SYMMETRIC)

_ALIASES = {
    "quadratic": "quadratic", "squared": "quadratic", "l1": "quadratic",
    "entropy": "entropy", "stein": "entropy", "l2": "entropy",
    "symmetric": "symmetric", "l3": "symmetric",
}


def parse_loss(text: str) -> LossSpec:
    """``squared|quadratic|L1``, ``entropy|L2``, ``symmetric|L3`` or ``linex:<alpha>``."""
    key = text.strip().lower()
    if key in _ALIASES:
        return LossSpec(_ALIASES[key])
    head, sep, tail = key.partition(":")
    if head in ("linex", "l4") and sep:
        try:
            alpha = float(tail)
        except ValueError:
            raise ValidationError(f"bad linex alpha in {text!r}") from None
        return LossSpec("linex", alpha)
    raise ValidationError(
        f"unknown loss {text!r}; expected squared|entropy|symmetric|linex:<alpha>"
    )


def parse_losses(text: str) -> list[LossSpec]:
    return [parse_loss(part) for part in text.split(",") if part.strip()]


def _positive(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("loss argument must be positive")
    return t


def _scalar_or_array(out, t_in):
    return float(out) if np.ndim(t_in) == 0 else out


def loss_eval(spec: Loss, t):
    """L(t) for scalar or array t > 0."""
    t_in = t
    t = _positive(t)
    kind = spec.kind
    if kind == "quadratic":
        out = (t - 1.0) ** 2
    elif kind == "entropy":
        out = t - np.log(t) - 1.0
    elif kind == "symmetric":
        out = t + 1.0 / t - 2.0
    elif kind == "linex":
        z = spec.alpha * (t - 1.0)
        out = np.expm1(z) - z
    else:
        out = np.asarray(spec.fn(t), dtype=float)
    return _scalar_or_array(out, t_in)


def loss_deriv(spec: Loss, t):
    """L'(t) for scalar or array t > 0."""
    t_in = t
    t = _positive(t)
    kind = spec.kind
    if kind == "quadratic":
        out = 2.0 * (t - 1.0)
    elif kind == "entropy":
        out = 1.0 - 1.0 / t
    elif kind == "symmetric":
        out = 1.0 - 1.0 / (t * t)
    elif kind == "linex":
        out = spec.alpha * np.expm1(spec.alpha * (t - 1.0))
    else:
        out = np.asarray(spec.deriv(t), dtype=float)
    return _scalar_or_array(out, t_in)


@dataclass(frozen=True)
class DomainCheck:
    ok: bool
    reason: str | None = None

    def __bool__(self):
        return self.ok

    def raise_if_bad(self):
        if not self.ok:
            raise DomainError(self.reason)


def validate_loss_domain(spec: Loss, gamma_shape: float, k: float) -> DomainCheck:
    """Whether E[L'(c Y^k)] = 0, Y ~ Gamma(a), has a finite integrand.

    quadratic: always; entropy: a - k > 0; symmetric: a - 2k > 0;
    linex: alpha < 0 or k <= 1 (k > 1 with alpha > 0 diverges).
    """
    a = gamma_shape
    if not k > 0:
        return DomainCheck(False, f"k must be positive (k={k:g})")
    if not a > 0:
        return DomainCheck(False, f"gamma shape must be positive (a={a:g})")
    kind = spec.kind
    if kind == "entropy" and not a - k > 0:
        return DomainCheck(False, f"entropy loss needs a-k>0; a-k≤0 (a={a:g}, k={k:g})")
    if kind == "symmetric" and not a - 2 * k > 0:
        return DomainCheck(False, f"symmetric loss needs a-2k>0; a-2k≤0 (a={a:g}, k={k:g})")
    if kind == "linex" and spec.alpha > 0 and k > 1:
        return DomainCheck(
            False,
            f"divergent linex integrand: alpha={spec.alpha:g} > 0 with k={k:g} > 1",
        )
    return DomainCheck(True)
