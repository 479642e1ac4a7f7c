"""Special functions, adaptive quadrature on finite and semi-infinite ranges,
and Brent's bracketed root finder.

Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _core
from ._accel import python_func
from .errors import BracketError, ConvergenceError, DomainError, NumericError

_lgamma = python_func(_core.lgamma_core)
_inc_gamma_pq = python_func(_core.inc_gamma_pq_core)
_log_inc_beta = python_func(_core.log_inc_beta_core)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 10:
            raise DomainError("max_subdivisions must be at least 10")


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    tol: float = 1e-12

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty bracket [{self.lo}, {self.hi}]")


DEFAULT_QUAD = QuadratureSpec()


# ---------------------------------------------------------------- special functions

def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0 (Lanczos, g=7)."""
    x = float(x)
    if not x > 0 or math.isinf(x):
        raise DomainError(f"log_gamma needs a finite positive argument, got {x}")
    return _lgamma(x)


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b)."""
    return math.exp(log_gamma(a) - log_gamma(b))


def log_beta(a: float, b: float) -> float:
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def _check_gamma_args(a, x):
    if not a > 0 or math.isinf(a):
        raise DomainError(f"incomplete gamma shape must be positive, got {a}")
    if not x >= 0:
        raise DomainError(f"incomplete gamma argument must be nonnegative, got {x}")


def reg_inc_gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    a, x = float(a), float(x)
    _check_gamma_args(a, x)
    if math.isinf(x):
        return 1.0
    return _inc_gamma_pq(a, x)[0]


def reg_inc_gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).

    Series below x = a + 1, Legendre continued fraction above.
    """
    a, x = float(a), float(x)
    _check_gamma_args(a, x)
    if math.isinf(x):
        return 0.0
    return _inc_gamma_pq(a, x)[1]


def log_reg_inc_beta(a: float, b: float, x: float) -> float:
    """log I_x(a, b); finite even where I_x itself underflows."""
    a, b, x = float(a), float(b), float(x)
    if not (a > 0 and b > 0):
        raise DomainError(f"incomplete beta parameters must be positive, got ({a}, {b})")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete beta argument must lie in [0, 1], got {x}")
    return _log_inc_beta(a, b, x)


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    return math.exp(log_reg_inc_beta(a, b, x))


def gamma_median(a: float, tol: float = 1e-12) -> float:
    """Median of Gamma(a, 1): the root of P(a, m) = 1/2."""
    a = float(a)
    if not a > 0 or math.isinf(a):
        raise DomainError(f"gamma_median needs a positive shape, got {a}")
    lo, hi = max(1e-8, a / 3.0), 3.0 * a + 10.0
    # very small shapes put the median far below a/3
    while reg_inc_gamma_p(a, lo) > 0.5 and lo > 1e-300:
        lo /= 4.0
    return find_root(lambda m: reg_inc_gamma_p(a, m) - 0.5, RootBracket(lo, hi, tol))


# ---------------------------------------------------------------- quadrature

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
# symmetric 15-point node layout on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[7] = _WG[3]
_GW[[9, 11, 13]] = _WG[2::-1]


def _evaluate(f, x):
    try:
        vals = np.asarray(f(x), dtype=float)
    except TypeError:  # scalar-only callable
        return np.array([float(f(xi)) for xi in x])
    if vals.shape != x.shape:
        vals = np.array([float(f(xi)) for xi in x])
    return vals


def _gk15_many(f, edges):
    """GK15 on consecutive panels [edges[i], edges[i+1]] with a single call of f."""
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    vals = _evaluate(f, x).reshape(-1, 15)
    if not np.all(np.isfinite(vals)):
        raise NumericError(f"integrand not finite on [{edges[0]}, {edges[-1]}]")
    kronrod = half * (vals @ _KW)
    gauss = half * (vals @ _GW)
    return kronrod, np.abs(kronrod - gauss)


def integrate(f: Callable, a: float, b: float, spec: QuadratureSpec = DEFAULT_QUAD,
              initial_panels: int = 1) -> float:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of ``f`` over [a, b].

    ``f`` should accept a numpy array of abscissae; scalar-only callables also work.
    The worst panel is bisected until the summed error estimate meets the
    tolerance. Raises :class:`NumericError` (with ``.estimate``/``.error``)
    when that does not happen within ``spec.max_subdivisions`` bisections.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    edges = np.linspace(a, b, max(1, initial_panels) + 1)
    vals, errs = _gk15_many(f, edges)
    heap = [(-e, lo, hi, v, e) for lo, hi, v, e in zip(edges[:-1], edges[1:], vals, errs)]
    heapq.heapify(heap)
    total, total_err = float(vals.sum()), float(errs.sum())
    for _ in range(spec.max_subdivisions):
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return sign * total
        _, lo, hi, v, e = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            heapq.heappush(heap, (-e, lo, hi, v, e))
            break  # interval no longer divisible in floating point
        (v1, v2), (e1, e2) = _gk15_many(f, (lo, mid, hi))
        total += v1 + v2 - v
        total_err += e1 + e2 - e
        heapq.heappush(heap, (-e1, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2))
    # recompute sums from the pieces to shed accumulated rounding
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(item[4] for item in heap)
    if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
        return sign * total
    raise NumericError(
        f"quadrature did not converge in {spec.max_subdivisions} subdivisions "
        f"(estimate {total:.6g}, error bound {total_err:.3g})",
        estimate=sign * total,
        error=total_err,
    )


def integrate_half_line(
    f: Callable, spec: QuadratureSpec = DEFAULT_QUAD, scale: float = 1.0
) -> float:
    """Integral of ``f`` over (0, inf).

    Uses v = scale * u / (1 - u), u in (0, 1); ``scale`` should sit near the
    bulk of the integrand's mass (e.g. the shape of a gamma kernel).
    """
    if not scale > 0:
        raise DomainError("scale must be positive")

    def mapped(u):
        one_minus = 1.0 - u
        v = scale * u / one_minus
        return f(v) * (scale / (one_minus * one_minus))

    return integrate(mapped, 0.0, 1.0, spec, initial_panels=8)


# ---------------------------------------------------------------- root finding

def find_root(f: Callable[[float], float], bracket: RootBracket, max_iter: int = 200) -> float:
    """Brent's method on a sign-changing bracket."""
    xa, xb = float(bracket.lo), float(bracket.hi)
    fa, fb = float(f(xa)), float(f(xb))
    if fa == 0.0:
        return xa
    if fb == 0.0:
        return xb
    if math.isnan(fa) or math.isnan(fb) or fa * fb > 0:
        raise BracketError(
            f"no sign change on [{xa}, {xb}] (f = {fa:.3g}, {fb:.3g})", estimate=None
        )
    xtol = bracket.tol
    rtol = 4.0 * _core._EPS
    xpre, xcur, fpre, fcur = xa, xb, fa, fb
    xblk = fblk = spre = scur = 0.0
    for _ in range(max_iter):
        if fpre * fcur < 0:
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur, xblk = xcur, xblk, xcur
            fpre, fcur, fblk = fcur, fblk, fcur
        delta = 0.5 * (xtol + rtol * abs(xcur))
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0.0 or abs(sbis) < delta:
            return xcur
        if abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)  # secant
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - delta):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis
        xpre, fpre = xcur, fcur
        if abs(scur) > delta:
            xcur += scur
        else:
            xcur += delta if sbis > 0 else -delta
        fcur = float(f(xcur))
    raise ConvergenceError(
        f"Brent did not converge in {max_iter} iterations", estimate=xcur, error=abs(sbis)
    )


def grow_bracket(
    f: Callable[[float], float],
    lo: float = 1e-10,
    hi: float = 1.0,
    factor: float = 4.0,
    max_expansions: int = 50,
    floor: float = 1e-10,
) -> RootBracket:
    """Grow ``hi`` geometrically until ``f`` changes sign on [lo, hi].

    Assumes f increasing, the situation of every multiplier equation. If
    f(lo) >= 0 the bracket is first moved down (lo shrinks by ``factor``
    until ``floor``). A non-finite f(hi) is read as "far past the root" and
    ``hi`` is pulled back.
    """
    flo = f(lo)
    while flo >= 0 and lo / factor >= floor:
        lo, hi = lo / factor, lo
        flo = f(lo)
    if not flo < 0:
        raise BracketError(f"expected f({lo}) < 0, got {flo}")
    for _ in range(max_expansions):
        try:
            fhi = f(hi)
        except NumericError:
            fhi = math.nan
        if math.isfinite(fhi):
            if fhi >= 0:
                return RootBracket(lo, hi)
            lo, hi = hi, hi * factor
        else:
            hi = 0.5 * (lo + hi)
    raise BracketError(f"no sign change found after {max_expansions} expansions (hi={hi})")
