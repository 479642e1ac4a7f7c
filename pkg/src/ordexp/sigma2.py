"""Estimators of sigma_2^k, the larger of the two ordered scales.

Multipliers are functions of W = S1/S2 and W1 = X2/S2 and scale S2^k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, NumericError
from .kernel import baee_constant, constants
from .losses import Loss, LossSpec, loss_deriv, validate_loss_domain
from .model import EstimationConfig, SufficientStats, pivots
from .numerics import (
    QuadratureSpec,
    RootBracket,
    find_root,
    gamma_median,
    grow_bracket,
    integrate_half_line,
    log_gamma,
    log_reg_inc_beta,
    reg_inc_gamma_q,
)
from .sigma1 import EstimateReport

ESTIMATORS = ("delta02", "delta21", "delta22", "deltaD", "bz2", "pitman2", "pcaee2", "pitman2_pcaee")
BZ_METHODS = ("beta", "quadrature", "generic")
_QUAD = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-300, max_subdivisions=800)
_RESIDUAL_QUAD = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=800)


@dataclass(frozen=True)
class Sigma2Constants:
    d02: float
    beta1: float
    beta2: float

    def __post_init__(self):
        if not (self.d02 > 0 and self.beta1 > 0 and self.beta2 > 0):
            raise NumericError(f"non-positive sigma2 constant in {self}")

    @property
    def expansion_dominates(self) -> bool:
        """beta1 < d02, the condition under which delta21 improves on delta02."""
        return self.beta1 < self.d02

    @classmethod
    def compute(cls, p1: int, p2: int, cfg: EstimationConfig) -> "Sigma2Constants":
        c = constants(p1, p2, cfg.k, cfg.loss)
        return cls(c.d02, c.beta1, c.beta2)


def _report(eid, multiplier, stats, cfg, active):
    return EstimateReport(eid, multiplier, multiplier * stats.s2**cfg.k, active,
                          cfg.loss, cfg.k, target="sigma2")


def delta02(stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    return _report("delta02", baee_constant(stats.p2, cfg.k, cfg.loss), stats, cfg, False)


def _xi1(w, c, k):
    return max(c.d02, c.beta1 * (1 + w) ** k)


def _xi2(w1, c, k):
    return min(c.d02, c.beta2 * (1 + w1) ** k) if w1 > 0 else c.d02


def delta21(stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    """Expansion: max{d02, beta1 (1+W)^k} S2^k."""
    c = Sigma2Constants.compute(stats.p1, stats.p2, cfg)
    m = _xi1(pivots(stats).w, c, cfg.k)
    return _report("delta21", m, stats, cfg, m != c.d02)


def delta22(stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    """Shrinkage: min{d02, beta2 (1+W1)^k} S2^k when W1 > 0, else the BAEE."""
    c = Sigma2Constants.compute(stats.p1, stats.p2, cfg)
    m = _xi2(pivots(stats).w1, c, cfg.k)
    return _report("delta22", m, stats, cfg, m != c.d02)


def double_shrinkage(stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    """{xi1(W) + xi2(W1) - d02} S2^k, combining delta21 and delta22."""
    c = Sigma2Constants.compute(stats.p1, stats.p2, cfg)
    pv = pivots(stats)
    m = _xi1(pv.w, c, cfg.k) + _xi2(pv.w1, c, cfg.k) - c.d02
    if not m > 0:
        raise NumericError(f"double-shrinkage multiplier {m} is not positive")
    return _report("deltaD", m, stats, cfg, m != c.d02)


# ---------------------------------------------------------------- Brewster-Zidek boundary

def _bz_shapes(p2, k, loss):
    if loss.kind == "quadratic":
        return p2 + k - 1, p2 + 2 * k - 1, 1.0
    if loss.kind == "entropy":
        return p2 - 1, p2 + k - 1, 1.0
    if loss.kind == "symmetric":
        return p2 - k - 1, p2 + k - 1, 0.5
    return None


def _check_bz_domain(p2, k, loss):
    validate_loss_domain(loss, p2 + k - 1, k).raise_if_bad()


def _bz2_beta(w, p1, p2, k, loss):
    lo, hi, power = _bz_shapes(p2, k, loss)
    y = 1.0 / (1.0 + w)
    d02 = baee_constant(p2, k, loss)
    return d02 * math.exp(power * (log_reg_inc_beta(lo, p1 - 1, y) - log_reg_inc_beta(hi, p1 - 1, y)))


def tail_moment(s: float, w: float, p1: int) -> float:
    """int_0^inf v^(s-1) e^(-v) Q(p1-1, v w) dv."""
    qvec = np.vectorize(lambda v: reg_inc_gamma_q(p1 - 1, v * w))
    lg = log_gamma(s)

    def f(v):
        with np.errstate(divide="ignore", under="ignore", over="ignore", invalid="ignore"):
            dens = np.exp((s - 1) * np.log(v) - v - lg)
        return np.where(dens > 0, dens, 0.0) * qvec(v)

    return math.exp(lg) * integrate_half_line(f, _QUAD, scale=s / (1.0 + w))


def _bz2_quadrature(w, p1, p2, k, loss):
    lo, hi, power = _bz_shapes(p2, k, loss)
    return (tail_moment(lo, w, p1) / tail_moment(hi, w, p1)) ** power


def bz2_residual(xi: float, w: float, p1: int, p2: int, k: float, loss: Loss) -> float:
    """int L'(xi v^k) v^(k+p2-2) e^(-v) Q(p1-1, v w) dv, normalised by Gamma(p2+k-1)."""
    shape = p2 + k - 1
    lg = log_gamma(shape)
    qvec = np.vectorize(lambda v: reg_inc_gamma_q(p1 - 1, v * w))

    def integrand(v):
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            dens = np.exp((shape - 1) * np.log(v) - v - lg)
            vals = loss_deriv(loss, np.maximum(xi * v**k, 1e-300)) * dens * qvec(v)
        return np.where(dens > 0, vals, 0.0)

    return integrate_half_line(integrand, _RESIDUAL_QUAD, scale=shape / (1.0 + w))


def _bz2_generic(w, p1, p2, k, loss):
    f = lambda xi: bz2_residual(xi, w, p1, p2, k, loss)  # noqa: E731
    br = grow_bracket(f, lo=1e-10, hi=baee_constant(p2, k, loss))
    return find_root(f, RootBracket(br.lo, br.hi, tol=1e-15))


def bz_multiplier_sigma2(w: float, p1: int, p2: int, cfg: EstimationConfig,
                         method: str | None = None) -> float:
    """Brewster-Zidek boundary xi01(w).

    ``beta`` uses I_{1/(1+w)}(s, p1-1) ratios, ``quadrature`` integrates
    v^(s-1) e^(-v) Q(p1-1, v w) directly and ``generic`` solves the defining
    equation for any loss.
    """
    k, loss = cfg.k, cfg.loss
    if not w > 0:
        raise DomainError(f"w must be positive, got {w}")
    _check_bz_domain(p2, k, loss)
    closed = isinstance(loss, LossSpec) and _bz_shapes(p2, k, loss) is not None
    method = method or ("beta" if closed else "generic")
    if method not in BZ_METHODS:
        raise DomainError(f"unknown method {method!r}")
    if method != "generic" and not closed:
        raise DomainError(f"no closed-form reduction for loss {loss.label}; use method='generic'")
    if method == "beta":
        return _bz2_beta(w, p1, p2, k, loss)
    if method == "quadrature":
        return _bz2_quadrature(w, p1, p2, k, loss)
    return _bz2_generic(w, p1, p2, k, loss)


def bz_sigma2(stats: SufficientStats, cfg: EstimationConfig, method: str | None = None) -> EstimateReport:
    m = bz_multiplier_sigma2(pivots(stats).w, stats.p1, stats.p2, cfg, method)
    return _report("bz2", m, stats, cfg, False)


# ---------------------------------------------------------------- Pitman closeness

def pitman_bounds_sigma2(w: float, p1: int, p2: int, k: float) -> tuple[float, float]:
    """[l(w), u(w)] = [((1+w)/q)^k, inf]; the upper end is the eta -> 0 limit."""
    q = gamma_median(p1 + p2 - 2)
    return ((1.0 + w) / q) ** k, math.inf


def pitman_estimate_sigma2(stats: SufficientStats, cfg: EstimationConfig,
                           base: str = "baee") -> EstimateReport:
    """max{l(W), c} S2^k with c = d02 (``baee``) or m02 (``pcaee``)."""
    c = constants(stats.p1, stats.p2, cfg.k, cfg.loss)
    if base == "baee":
        eid, unrestricted = "pitman2", c.d02
    elif base == "pcaee":
        eid, unrestricted = "pitman2_pcaee", c.m02
    else:
        raise DomainError(f"base must be 'baee' or 'pcaee', got {base!r}")
    lo, hi = pitman_bounds_sigma2(pivots(stats).w, stats.p1, stats.p2, cfg.k)
    m = max(lo, min(unrestricted, hi))
    return _report(eid, m, stats, cfg, m != unrestricted)


def pcaee_sigma2(stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    c = constants(stats.p1, stats.p2, cfg.k, cfg.loss)
    return _report("pcaee2", c.m02, stats, cfg, False)


def estimate(eid: str, stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    if eid == "delta02":
        return delta02(stats, cfg)
    if eid == "delta21":
        return delta21(stats, cfg)
    if eid == "delta22":
        return delta22(stats, cfg)
    if eid == "deltaD":
        return double_shrinkage(stats, cfg)
    if eid == "bz2":
        return bz_sigma2(stats, cfg)
    if eid == "pitman2":
        return pitman_estimate_sigma2(stats, cfg, "baee")
    if eid == "pitman2_pcaee":
        return pitman_estimate_sigma2(stats, cfg, "pcaee")
    if eid == "pcaee2":
        return pcaee_sigma2(stats, cfg)
    raise DomainError(f"unknown sigma2 estimator {eid!r}")


def table(stats: SufficientStats, cfg: EstimationConfig,
          ids=("delta02", "delta21", "delta22", "deltaD", "bz2", "pitman2")) -> list[EstimateReport]:
    return [estimate(eid, stats, cfg) for eid in ids]


# ---------------------------------------------------------------- vectorised (Monte Carlo)

def bz2_batch(w: np.ndarray, p1: int, p2: int, k: float, loss: Loss) -> np.ndarray:
    _check_bz_domain(p2, k, loss)
    shapes = _bz_shapes(p2, k, loss) if isinstance(loss, LossSpec) else None
    if shapes is None:
        cfg = EstimationConfig(k, loss)
        return np.array([bz_multiplier_sigma2(float(wi), p1, p2, cfg, "generic") for wi in w])
    lo, hi, power = shapes
    y = 1.0 / (1.0 + w)
    d02 = baee_constant(p2, k, loss)
    diff = kernels.log_inc_beta(lo, p1 - 1, y) - kernels.log_inc_beta(hi, p1 - 1, y)
    return d02 * np.exp(power * diff)


def multipliers_batch(x1, x2, s1, s2, p1, p2, k, loss, ids=ESTIMATORS) -> dict:
    """Multipliers of the requested sigma2 estimators for arrays of statistics."""
    c = constants(p1, p2, k, loss)
    w, w1 = s1 / s2, x2 / s2
    d02 = np.full_like(w, c.d02)
    xi1 = xi2 = None
    out = {}
    for eid in ids:
        if eid in ("delta21", "deltaD") and xi1 is None:
            xi1 = np.maximum(d02, c.beta1 * (1 + w) ** k)
        if eid in ("delta22", "deltaD") and xi2 is None:
            with np.errstate(invalid="ignore"):
                xi2 = np.where(w1 > 0, np.minimum(d02, c.beta2 * (1 + w1) ** k), d02)
        if eid == "delta02":
            out[eid] = d02
        elif eid == "delta21":
            out[eid] = xi1
        elif eid == "delta22":
            out[eid] = xi2
        elif eid == "deltaD":
            out[eid] = xi1 + xi2 - c.d02
        elif eid == "bz2":
            out[eid] = bz2_batch(w, p1, p2, k, loss)
        elif eid in ("pitman2", "pitman2_pcaee"):
            base = c.d02 if eid == "pitman2" else c.m02
            out[eid] = np.maximum(((1 + w) / c.pitman_median) ** k, base)
        elif eid == "pcaee2":
            out[eid] = np.full_like(w, c.m02)
        else:
            raise DomainError(f"unknown sigma2 estimator {eid!r}")
    return out
