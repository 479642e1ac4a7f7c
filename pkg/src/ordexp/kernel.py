"""The multiplier primitive: the c > 0 solving E[L'(c Y^k)] = 0, Y ~ Gamma(a, 1).

Every equivariant constant reduces to it after substituting y = v(1 + ...):

=========  ======================  ===========
constant   estimator               gamma shape
=========  ======================  ===========
d0i        BAEE of sigma_i^k       p_i + k - 1
alpha1     delta11                 p1 + p2 + k - 2
alpha2     delta12, delta13        p1 + p2 + k - 1
alpha4     delta14                 p1 + p2 + k
beta1      delta21                 p1 + p2 + k - 2
beta2      delta22                 p2 + k
=========  ======================  ===========
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .losses import Loss, LossSpec, loss_deriv, validate_loss_domain
from .numerics import (
    QuadratureSpec,
    RootBracket,
    find_root,
    gamma_median,
    grow_bracket,
    integrate_half_line,
    log_gamma,
)

_KERNEL_QUAD = QuadratureSpec(rel_tol=1e-13, abs_tol=1e-15, max_subdivisions=400)
CLOSED_FORM_KINDS = ("quadratic", "entropy", "symmetric")


@dataclass(frozen=True)
class MultiplierQuery:
    gamma_shape: float
    k: float
    loss: Loss

    def __post_init__(self):
        validate_loss_domain(self.loss, self.gamma_shape, self.k).raise_if_bad()


def closed_form(a: float, k: float, loss: LossSpec) -> float | None:
    """Closed-form root where one exists, else None."""
    kind = loss.kind
    if kind == "quadratic":
        return math.exp(log_gamma(a) - log_gamma(a + k))
    if kind == "entropy":
        return math.exp(log_gamma(a - k) - log_gamma(a))
    if kind == "symmetric":
        return math.exp(0.5 * (log_gamma(a - 2 * k) - log_gamma(a)))
    if kind == "linex" and k == 1:
        # E exp(alpha c Y) = (1 - alpha c)^(-a) = exp(alpha)
        return -math.expm1(-loss.alpha / a) / loss.alpha
    return None


def psi_residual(c: float, a: float, k: float, loss: Loss) -> float:
    """E[L'(c Y^k)] for Y ~ Gamma(a, 1), by quadrature."""
    lg = log_gamma(a)

    def integrand(y):
        dens = _gamma_density(y, a, lg)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(dens > 0, loss_deriv(loss, c * y**k) * dens, 0.0)

    return integrate_half_line(integrand, _KERNEL_QUAD, scale=a)


def _gamma_density(y, a, lg):
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        out = np.exp((a - 1.0) * np.log(y) - y - lg)
    return np.where(y > 0, out, 0.0)


def psi_solve_generic(a: float, k: float, loss: Loss) -> float:
    """Quadrature + Brent route, valid for any loss passing the domain check."""
    MultiplierQuery(a, k, loss)
    f = lambda c: psi_residual(c, a, k, loss)  # noqa: E731
    # the root sits near E[Y]^-k = a^-k for every bowl-shaped loss
    guess = a ** (-k)
    bracket = grow_bracket(f, lo=0.5 * guess, hi=2.0 * guess, factor=2.0)
    return find_root(f, RootBracket(bracket.lo, bracket.hi, tol=1e-16))


@lru_cache(maxsize=4096)
def _psi_cached(a: float, k: float, loss: Loss) -> float:
    MultiplierQuery(a, k, loss)
    if isinstance(loss, LossSpec):
        c = closed_form(a, k, loss)
        if c is not None:
            return c
    return psi_solve_generic(a, k, loss)


def psi_solve(a: float, k: float, loss: Loss) -> float:
    """The unique c > 0 with E[L'(c Y^k)] = 0, Y ~ Gamma(a, 1).

    Closed forms for quadratic, entropy and symmetric losses (and linex with
    k = 1); quadrature + Brent otherwise. Results are cached by (a, k, loss).
    """
    return _psi_cached(float(a), float(k), loss)


def _check_p(p):
    if p < 2:
        raise DomainError(f"sample size must be at least 2 (p={p})")


def baee_constant(p: int, k: float, loss: Loss) -> float:
    """d0: the BAEE multiplier of sigma^k from a sample of size p."""
    _check_p(p)
    return psi_solve(p + k - 1, k, loss)


def umvue_constant(p: int, k: float) -> float:
    """Gamma(p-1) / Gamma(p+k-1); equals the entropy-loss BAEE constant."""
    _check_p(p)
    if not k > 0:
        raise DomainError("k must be positive")
    return math.exp(log_gamma(p - 1) - log_gamma(p + k - 1))


@lru_cache(maxsize=1024)
def pcaee_constant(p: int, k: float) -> float:
    """Pitman-closest equivariant multiplier median(Gamma(p-1))^(-k)."""
    _check_p(p)
    return gamma_median(p - 1) ** (-k)


@dataclass(frozen=True)
class Constants:
    """All multipliers for one (p1, p2, k, loss)."""

    p1: int
    p2: int
    k: float
    loss: Loss
    d01: float
    d02: float
    alpha1: float
    alpha2: float
    alpha4: float
    beta1: float
    beta2: float
    m01: float
    m02: float
    pitman_median: float

    @property
    def alpha3(self) -> float:
        # delta13 uses the same gamma shape as delta12
        return self.alpha2

    def as_dict(self) -> dict:
        return {
            "d01": self.d01, "d02": self.d02, "alpha1": self.alpha1,
            "alpha2": self.alpha2, "alpha3": self.alpha3, "alpha4": self.alpha4,
            "beta1": self.beta1, "beta2": self.beta2, "m01": self.m01,
            "m02": self.m02, "umvue1": umvue_constant(self.p1, self.k),
            "umvue2": umvue_constant(self.p2, self.k),
            "pitman_median": self.pitman_median,
        }


@lru_cache(maxsize=1024)
def constants(p1: int, p2: int, k: float, loss: Loss) -> Constants:
    _check_p(p1)
    _check_p(p2)
    n = p1 + p2
    return Constants(
        p1=p1, p2=p2, k=k, loss=loss,
        d01=baee_constant(p1, k, loss),
        d02=baee_constant(p2, k, loss),
        alpha1=psi_solve(n + k - 2, k, loss),
        alpha2=psi_solve(n + k - 1, k, loss),
        alpha4=psi_solve(n + k, k, loss),
        beta1=psi_solve(n + k - 2, k, loss),
        beta2=psi_solve(p2 + k, k, loss),
        m01=pcaee_constant(p1, k),
        m02=pcaee_constant(p2, k),
        pitman_median=gamma_median(n - 2),
    )
