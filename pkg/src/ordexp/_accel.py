"""Backend switch for the hot kernels.

``ORDEXP_BACKEND=numpy`` (or ``ORDEXP_DISABLE_NUMBA=1``) selects the pure numpy
path and never imports numba. Otherwise numba is used when importable.
"""
from __future__ import annotations

import os

_env_backend = os.environ.get("ORDEXP_BACKEND", "").strip().lower()
_disabled = _env_backend == "numpy" or os.environ.get(
    "ORDEXP_DISABLE_NUMBA", ""
).strip().lower() in {"1", "true", "yes", "on"}

if _disabled:
    numba = None
else:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None

HAVE_NUMBA = numba is not None
_backend = "numba" if HAVE_NUMBA else "numpy"


def jit(func):
    """``numba.njit(cache=True, nogil=True)`` when numba is enabled, else identity."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def python_func(func):
    return getattr(func, "py_func", func)


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch kernel dispatch at runtime; returns the previous backend."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is disabled or missing")
    previous, _backend = _backend, name
    return previous
