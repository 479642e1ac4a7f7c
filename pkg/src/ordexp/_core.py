"""Scalar special-function cores.

Written in the numba-compatible subset of Python: no validation, no
exceptions, floats in and floats out. The public wrappers in
:mod:`ordexp.numerics` validate arguments and call the pure-Python version;
the numba kernels call the compiled version.
"""
import math

import numpy as np

from ._accel import jit

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.91893853320467274178
_EPS = 2.220446049250313e-16
_FPMIN = 1e-300


@jit
def lgamma_core(x):
    if x < 0.5:
        # reflection; sin(pi x) > 0 on (0, 0.5)
        return math.log(math.pi / math.sin(math.pi * x)) - lgamma_core(1.0 - x)
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(acc)


@jit
def _gamma_series(a, x, lga):
    # P(a, x) by its power series; converges fast for x < a + 1
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(1000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - lga)


@jit
def _gamma_contfrac(a, x, lga):
    # Q(a, x) by modified Lentz on the Legendre continued fraction
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - lga) * h


@jit
def inc_gamma_pq_core(a, x):
    """(P(a, x), Q(a, x)), each computed on its accurate side of x = a + 1."""
    if x <= 0.0:
        return 0.0, 1.0
    lga = lgamma_core(a)
    if x < a + 1.0:
        p = _gamma_series(a, x, lga)
        return p, 1.0 - p
    q = _gamma_contfrac(a, x, lga)
    return 1.0 - q, q


@jit
def _beta_contfrac(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, 1000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


@jit
def log_inc_beta_core(a, b, x):
    """log I_x(a, b). Stays finite when I_x underflows (small x)."""
    if x <= 0.0:
        return -np.inf
    if x >= 1.0:
        return 0.0
    lbeta = lgamma_core(a) + lgamma_core(b) - lgamma_core(a + b)
    if x < (a + 1.0) / (a + b + 2.0):
        return (
            a * math.log(x) + b * math.log1p(-x) - lbeta - math.log(a)
            + math.log(_beta_contfrac(a, b, x))
        )
    y = 1.0 - x
    tail = math.exp(
        b * math.log(y) + a * math.log(x) - lbeta - math.log(b)
        + math.log(_beta_contfrac(b, a, y))
    )
    return math.log1p(-tail)


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


@jit
def mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@jit
def stream_key(seed, eta_index, rep):
    """Counter-based key for replication ``rep`` at grid point ``eta_index``."""
    h = mix64(seed + _GOLDEN * (eta_index + _ONE))
    return mix64(h + _GOLDEN * (rep + _ONE))


@jit
def uniform_at(key, j):
    """j-th uniform of a stream, strictly inside (0, 1)."""
    z = mix64(key + _GOLDEN * (j + _ONE))
    return (float(z >> _S11) + 0.5) * _INV53
