"""Hot loops of the Monte Carlo engine, in two interchangeable implementations.

* numba: explicit per-element loops compiled with ``njit(nogil=True)``.
* numpy: whole-array vectorised code, used when ``ORDEXP_BACKEND=numpy``.

Both consume the same counter-based random stream, so they produce the same
samples up to last-ulp differences in ``log``.
"""
from __future__ import annotations

import math

import numpy as np

from . import _accel, _core

_GOLDEN = _core._GOLDEN
_INV53 = _core._INV53


# ---------------------------------------------------------------- random stream

def _mix64_np(z):
    z = (z ^ (z >> np.uint64(30))) * _core._MIX1
    z = (z ^ (z >> np.uint64(27))) * _core._MIX2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, eta_index: int, reps: np.ndarray) -> np.ndarray:
    """Per-replication keys; a pure function of (seed, eta_index, rep)."""
    seed_arr = np.array([seed], dtype=np.uint64)
    h = _mix64_np(seed_arr + _GOLDEN * np.array([eta_index + 1], dtype=np.uint64))
    return _mix64_np(h + _GOLDEN * (np.asarray(reps, dtype=np.uint64) + np.uint64(1)))


def stream_uniforms(keys: np.ndarray, offset: int, count: int) -> np.ndarray:
    """uniforms[i, j] = j-th draw (after ``offset``) of the stream with key ``keys[i]``."""
    j = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    z = _mix64_np(keys[:, None] + _GOLDEN * j[None, :])
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53


def _sample_stats_numpy(seed, eta_index, start, n, p1, p2, mu1, mu2, sigma1, sigma2, attempt):
    reps = np.arange(start, start + n, dtype=np.uint64)
    keys = stream_keys(seed, eta_index, reps)
    u = stream_uniforms(keys, attempt * (p1 + p2), p1 + p2)
    x = np.empty_like(u)
    x[:, :p1] = mu1 - sigma1 * np.log(1.0 - u[:, :p1])
    x[:, p1:] = mu2 - sigma2 * np.log(1.0 - u[:, p1:])
    x1 = x[:, :p1].min(axis=1)
    x2 = x[:, p1:].min(axis=1)
    s1 = (x[:, :p1] - x1[:, None]).sum(axis=1)
    s2 = (x[:, p1:] - x2[:, None]).sum(axis=1)
    return x1, x2, s1, s2


@_accel.jit
def _sample_stats_loop(seed, eta_index, start, n, p1, p2, mu1, mu2, sigma1, sigma2, attempt):
    x1 = np.empty(n)
    x2 = np.empty(n)
    s1 = np.empty(n)
    s2 = np.empty(n)
    buf = np.empty(p1 + p2)
    offset = attempt * (p1 + p2)
    for i in range(n):
        key = _core.stream_key(seed, eta_index, np.uint64(start + i))
        for j in range(p1 + p2):
            u = _core.uniform_at(key, np.uint64(offset + j))
            if j < p1:
                buf[j] = mu1 - sigma1 * math.log(1.0 - u)
            else:
                buf[j] = mu2 - sigma2 * math.log(1.0 - u)
        m1 = buf[0]
        for j in range(1, p1):
            m1 = min(m1, buf[j])
        m2 = buf[p1]
        for j in range(p1 + 1, p1 + p2):
            m2 = min(m2, buf[j])
        acc = 0.0
        for j in range(p1):
            acc += buf[j] - m1
        s1[i] = acc
        acc = 0.0
        for j in range(p1, p1 + p2):
            acc += buf[j] - m2
        s2[i] = acc
        x1[i] = m1
        x2[i] = m2
    return x1, x2, s1, s2


def sample_stats(seed, eta_index, start, n, p1, p2, mu1, mu2, sigma1, sigma2, attempt=0):
    """Sufficient statistics for replications ``start .. start+n-1``.

    Each replication draws p1 + p2 uniforms from its own counter-based stream
    and maps them through x = mu - sigma * ln(1 - U).
    """
    args = (int(seed), int(eta_index), int(start), int(n), int(p1), int(p2),
            float(mu1), float(mu2), float(sigma1), float(sigma2), int(attempt))
    if _accel.get_backend() == "numba":
        s, e, st, *rest = args
        return _sample_stats_loop(np.uint64(s), np.uint64(e), st, *rest)
    return _sample_stats_numpy(*args)


# ---------------------------------------------------------------- incomplete beta

def _beta_cf_numpy(a, b, x):
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    fpmin = _core._FPMIN
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < fpmin, fpmin, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, 1000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < fpmin, fpmin, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < fpmin, fpmin, c)
        d = 1.0 / d
        h = np.where(done, h, h * (d * c))
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < fpmin, fpmin, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < fpmin, fpmin, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < 1e-16
        if done.all():
            break
    return h


def _log_inc_beta_numpy(a, b, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    lgam = _accel.python_func(_core.lgamma_core)
    lbeta = lgam(a) + lgam(b) - lgam(a + b)
    low = x <= 0.0
    high = x >= 1.0
    inner = ~(low | high)
    swap = inner & (x >= (a + 1.0) / (a + b + 2.0))
    direct = inner & ~swap
    if direct.any():
        xd = x[direct]
        out[direct] = (a * np.log(xd) + b * np.log1p(-xd) - lbeta - math.log(a)
                       + np.log(_beta_cf_numpy(a, b, xd)))
    if swap.any():
        xs = x[swap]
        y = 1.0 - xs
        tail = np.exp(b * np.log(y) + a * np.log(xs) - lbeta - math.log(b)
                      + np.log(_beta_cf_numpy(b, a, y)))
        out[swap] = np.log1p(-tail)
    out[low] = -np.inf
    out[high] = 0.0
    return out


@_accel.jit
def _log_inc_beta_loop(a, b, x):
    out = np.empty(x.size)
    for i in range(x.size):
        out[i] = _core.log_inc_beta_core(a, b, x[i])
    return out


def log_inc_beta(a: float, b: float, x) -> np.ndarray:
    """Elementwise log I_x(a, b) for scalar a, b > 0 and an array x in [0, 1]."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    shape = x.shape
    flat = x.ravel()
    if _accel.get_backend() == "numba":
        out = _log_inc_beta_loop(float(a), float(b), flat)
    else:
        out = _log_inc_beta_numpy(float(a), float(b), flat)
    return out.reshape(shape)
