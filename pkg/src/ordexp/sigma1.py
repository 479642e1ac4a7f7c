"""Estimators of sigma_1^k, the smaller of the two ordered scales.

All estimators have the form multiplier(T, T1, T2) * S1^k with pivots
T = S2/S1, T1 = X1/S1, T2 = X2/S1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError
from .kernel import baee_constant, constants
from .losses import Loss, LossSpec, loss_deriv, validate_loss_domain
from .model import EstimationConfig, SufficientStats, pivots
from .numerics import (
    QuadratureSpec,
    RootBracket,
    find_root,
    gamma_median,
    grow_bracket,
    integrate,
    integrate_half_line,
    log_gamma,
    log_reg_inc_beta,
    reg_inc_gamma_p,
)

STEIN_VARIANTS = ("delta11", "delta12", "delta13", "delta14")
ESTIMATORS = ("delta01", *STEIN_VARIANTS, "bz1", "pitman1", "pcaee1", "pitman1_pcaee")
BZ_METHODS = ("beta", "quadrature", "generic")
_QUAD = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-300, max_subdivisions=2000)
# residuals vanish at the root, so they need an absolute floor
_RESIDUAL_QUAD = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=800)


@dataclass(frozen=True)
class EstimateReport:
    estimator_id: str
    multiplier: float
    value: float
    truncation_active: bool
    loss: Loss
    k: float
    target: str = "sigma1"

    def as_dict(self) -> dict:
        return {
            "estimator": self.estimator_id,
            "target": self.target,
            "loss": self.loss.label,
            "k": self.k,
            "multiplier": self.multiplier,
            "value": self.value,
            "truncation_active": self.truncation_active,
        }


def _report(eid, multiplier, stats, cfg, active):
    return EstimateReport(eid, multiplier, multiplier * stats.s1**cfg.k, active, cfg.loss, cfg.k)


def delta01(stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    """BAEE d01 * S1^k."""
    return _report("delta01", baee_constant(stats.p1, cfg.k, cfg.loss), stats, cfg, False)


def stein_sigma1(variant: str, stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    """Stein-type truncations of the BAEE.

    delta11: min{d01, alpha1 (1+T)^k}
    delta12: min{d01, alpha2 (1+T+p1 T1)^k} if T1 > 0
    delta13: min{d01, alpha2 (1+T+p2 T2)^k} if T2 > 0
    delta14: min{d01, alpha4 (1+T+p1 T1+p2 T2)^k} if T1 > 0 and T2 > 0
    and d01 otherwise.
    """
    if variant not in STEIN_VARIANTS:
        raise DomainError(f"unknown Stein variant {variant!r}")
    c = constants(stats.p1, stats.p2, cfg.k, cfg.loss)
    pv = pivots(stats)
    k = cfg.k
    if variant == "delta11":
        candidate = c.alpha1 * (1 + pv.t) ** k
    elif variant == "delta12":
        candidate = c.alpha2 * (1 + pv.t + stats.p1 * pv.t1) ** k if pv.t1 > 0 else None
    elif variant == "delta13":
        candidate = c.alpha3 * (1 + pv.t + stats.p2 * pv.t2) ** k if pv.t2 > 0 else None
    else:
        candidate = (
            c.alpha4 * (1 + pv.t + stats.p1 * pv.t1 + stats.p2 * pv.t2) ** k
            if pv.t1 > 0 and pv.t2 > 0 else None
        )
    if candidate is None or candidate >= c.d01:
        return _report(variant, c.d01, stats, cfg, False)
    return _report(variant, candidate, stats, cfg, True)


# ---------------------------------------------------------------- Brewster-Zidek boundary

def _bz_shapes(p1, k, loss):
    """(lower, upper, power) so that phi = (ratio of moments at the two shapes)^power."""
    if loss.kind == "quadratic":
        return p1 + k - 1, p1 + 2 * k - 1, 1.0
    if loss.kind == "entropy":
        return p1 - 1, p1 + k - 1, 1.0
    if loss.kind == "symmetric":
        return p1 - k - 1, p1 + k - 1, 0.5
    return None


def _check_bz_domain(p1, k, loss):
    validate_loss_domain(loss, p1 + k - 1, k).raise_if_bad()


def _bz1_beta(t, p1, p2, k, loss):
    lo, hi, power = _bz_shapes(p1, k, loss)
    x = t / (1.0 + t)
    d01 = baee_constant(p1, k, loss)
    return d01 * math.exp(power * (log_reg_inc_beta(p2 - 1, lo, x) - log_reg_inc_beta(p2 - 1, hi, x)))


def truncated_beta_integral(a: float, t: float, p2: int) -> float:
    """I_a(t) = int_0^t u^(p2-2) (1+u)^(-a) du by adaptive quadrature."""
    f = lambda u: u ** (p2 - 2) * (1.0 + u) ** (-a)  # noqa: E731
    if t <= 1.0:
        return integrate(f, 0.0, t, _QUAD)
    # split so the slowly decaying tail gets its own panels
    return integrate(f, 0.0, 1.0, _QUAD) + integrate(f, 1.0, t, _QUAD)


def _bz1_quadrature(t, p1, p2, k, loss):
    lo, hi, power = _bz_shapes(p1, k, loss)
    shift = p2 - 1
    a_lo, a_hi = lo + shift, hi + shift
    log_num = log_gamma(a_lo) + math.log(truncated_beta_integral(a_lo, t, p2))
    log_den = log_gamma(a_hi) + math.log(truncated_beta_integral(a_hi, t, p2))
    return math.exp(power * (log_num - log_den))


def bz1_residual(phi: float, t: float, p1: int, p2: int, k: float, loss: Loss) -> float:
    """int_0^inf L'(phi v^k) v^k F1(t, v) dv up to a positive factor.

    With F1(t, v) = int_0^t u^(p2-2) e^(-v(1+u)) v^(p1+p2-3) du
    = Gamma(p2-1) v^(p1-2) e^(-v) P(p2-1, v t).
    """
    shape = p1 + k - 1
    lg = log_gamma(shape)
    pvec = np.vectorize(lambda v: reg_inc_gamma_p(p2 - 1, v * t))

    def integrand(v):
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            dens = np.exp((shape - 1) * np.log(v) - v - lg)
            vals = loss_deriv(loss, np.maximum(phi * v**k, 1e-300)) * dens * pvec(v)
        return np.where(dens > 0, vals, 0.0)

    return integrate_half_line(integrand, _RESIDUAL_QUAD, scale=shape)


def _bz1_generic(t, p1, p2, k, loss):
    f = lambda phi: bz1_residual(phi, t, p1, p2, k, loss)  # noqa: E731
    br = grow_bracket(f, lo=1e-10, hi=baee_constant(p1, k, loss))
    return find_root(f, RootBracket(br.lo, br.hi, tol=1e-15))


def bz_multiplier_sigma1(t: float, p1: int, p2: int, cfg: EstimationConfig,
                         method: str | None = None) -> float:
    """Brewster-Zidek boundary phi01(t): the root in phi of
    int L'(phi v^k) v^k F1(t, v) dv = 0.

    ``method``: ``beta`` (regularized incomplete beta ratio, default for the
    three closed-form losses), ``quadrature`` (ratio of the truncated integrals
    I_a(t) by adaptive quadrature) or ``generic`` (any loss: quadrature + Brent).
    """
    k, loss = cfg.k, cfg.loss
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    _check_bz_domain(p1, k, loss)
    closed = isinstance(loss, LossSpec) and _bz_shapes(p1, k, loss) is not None
    method = method or ("beta" if closed else "generic")
    if method not in BZ_METHODS:
        raise DomainError(f"unknown method {method!r}")
    if method != "generic" and not closed:
        raise DomainError(f"no closed-form reduction for loss {loss.label}; use method='generic'")
    if method == "beta":
        return _bz1_beta(t, p1, p2, k, loss)
    if method == "quadrature":
        return _bz1_quadrature(t, p1, p2, k, loss)
    return _bz1_generic(t, p1, p2, k, loss)


def bz_sigma1(stats: SufficientStats, cfg: EstimationConfig, method: str | None = None) -> EstimateReport:
    m = bz_multiplier_sigma1(pivots(stats).t, stats.p1, stats.p2, cfg, method)
    return _report("bz1", m, stats, cfg, False)


# ---------------------------------------------------------------- Pitman closeness

def pitman_bounds_sigma1(t: float, p1: int, p2: int, k: float) -> tuple[float, float]:
    """Envelope [l(t), u(t)] of the Pitman-optimal multiplier over eta in (0, 1].

    Given T = t, V1 ~ Gamma(p1+p2-2) with rate 1 + eta t, so its median is
    q / (1 + eta t); the optimal multiplier is that median to the power -k.
    """
    q = gamma_median(p1 + p2 - 2)
    return q ** (-k), ((1.0 + t) / q) ** k


def pitman_estimate_sigma1(base: str, stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    """max{l(T), min{c, u(T)}} S1^k with c = d01 (base ``baee``) or m01 (base ``pcaee``)."""
    c = constants(stats.p1, stats.p2, cfg.k, cfg.loss)
    if base == "baee":
        eid, unrestricted = "pitman1", c.d01
    elif base == "pcaee":
        eid, unrestricted = "pitman1_pcaee", c.m01
    else:
        raise DomainError(f"base must be 'baee' or 'pcaee', got {base!r}")
    lo, hi = pitman_bounds_sigma1(pivots(stats).t, stats.p1, stats.p2, cfg.k)
    m = max(lo, min(unrestricted, hi))
    return _report(eid, m, stats, cfg, m != unrestricted)


def pcaee_sigma1(stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    c = constants(stats.p1, stats.p2, cfg.k, cfg.loss)
    return _report("pcaee1", c.m01, stats, cfg, False)


def estimate(eid: str, stats: SufficientStats, cfg: EstimationConfig) -> EstimateReport:
    if eid == "delta01":
        return delta01(stats, cfg)
    if eid in STEIN_VARIANTS:
        return stein_sigma1(eid, stats, cfg)
    if eid == "bz1":
        return bz_sigma1(stats, cfg)
    if eid == "pitman1":
        return pitman_estimate_sigma1("baee", stats, cfg)
    if eid == "pitman1_pcaee":
        return pitman_estimate_sigma1("pcaee", stats, cfg)
    if eid == "pcaee1":
        return pcaee_sigma1(stats, cfg)
    raise DomainError(f"unknown sigma1 estimator {eid!r}")


def table(stats: SufficientStats, cfg: EstimationConfig,
          ids=("delta01", *STEIN_VARIANTS, "bz1", "pitman1")) -> list[EstimateReport]:
    return [estimate(eid, stats, cfg) for eid in ids]


# ---------------------------------------------------------------- vectorised (Monte Carlo)

def bz1_batch(t: np.ndarray, p1: int, p2: int, k: float, loss: Loss) -> np.ndarray:
    _check_bz_domain(p1, k, loss)
    shapes = _bz_shapes(p1, k, loss) if isinstance(loss, LossSpec) else None
    if shapes is None:
        cfg = EstimationConfig(k, loss)
        return np.array([bz_multiplier_sigma1(float(ti), p1, p2, cfg, "generic") for ti in t])
    lo, hi, power = shapes
    x = t / (1.0 + t)
    d01 = baee_constant(p1, k, loss)
    diff = kernels.log_inc_beta(p2 - 1, lo, x) - kernels.log_inc_beta(p2 - 1, hi, x)
    return d01 * np.exp(power * diff)


def multipliers_batch(x1, x2, s1, s2, p1, p2, k, loss, ids=ESTIMATORS) -> dict:
    """Multipliers of the requested sigma1 estimators for arrays of statistics."""
    c = constants(p1, p2, k, loss)
    t, t1, t2 = s2 / s1, x1 / s1, x2 / s1
    d01 = np.full_like(t, c.d01)
    out = {}
    with np.errstate(invalid="ignore"):
        for eid in ids:
            if eid == "delta01":
                out[eid] = d01
            elif eid == "delta11":
                out[eid] = np.minimum(d01, c.alpha1 * (1 + t) ** k)
            elif eid == "delta12":
                out[eid] = np.where(t1 > 0, np.minimum(d01, c.alpha2 * (1 + t + p1 * t1) ** k), d01)
            elif eid == "delta13":
                out[eid] = np.where(t2 > 0, np.minimum(d01, c.alpha3 * (1 + t + p2 * t2) ** k), d01)
            elif eid == "delta14":
                both = (t1 > 0) & (t2 > 0)
                cand = c.alpha4 * (1 + t + p1 * t1 + p2 * t2) ** k
                out[eid] = np.where(both, np.minimum(d01, cand), d01)
            elif eid == "bz1":
                out[eid] = bz1_batch(t, p1, p2, k, loss)
            elif eid in ("pitman1", "pitman1_pcaee"):
                q = c.pitman_median
                base = c.d01 if eid == "pitman1" else c.m01
                out[eid] = np.maximum(q ** (-k), np.minimum(base, ((1 + t) / q) ** k))
            elif eid == "pcaee1":
                out[eid] = np.full_like(t, c.m01)
            else:
                raise DomainError(f"unknown sigma1 estimator {eid!r}")
    return out
