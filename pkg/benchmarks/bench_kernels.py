"""Compare the numba and pure-numpy kernel backends.

    python benchmarks/bench_kernels.py [--reps 90000] [--repeat 5]

Each kernel is run once per backend to warm up (numba compiles on first call),
then timed ``--repeat`` times; the best time is reported together with the
largest relative difference between the two backends' outputs.
"""
import argparse
import time

import numpy as np

from ordexp import _accel, kernels, mcrisk
from ordexp.losses import QUADRATIC


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def rel_diff(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=90_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba is not importable; only the numpy backend can run")
        return

    x = np.random.default_rng(1).uniform(0.01, 0.99, args.reps)
    cases = {
        "sample_stats": lambda: np.stack(kernels.sample_stats(1, 0, 0, args.reps, 4, 5, 0.0, 0.1, 0.5, 1.0)),
        "log_inc_beta": lambda: kernels.log_inc_beta(4.0, 5.0, x),
        "simulate_risk (1 eta, L1, 1 thread)": lambda: np.array([
            r.risk for r in mcrisk.simulate_risk(
                mcrisk.SimConfig(4, 5, 0.0, 0.1, eta_grid=(0.5,), losses=(QUADRATIC,), reps=args.reps),
                threads=1)
        ]),
    }
    print(f"{'kernel':<38} {'numba s':>10} {'numpy s':>10} {'speedup':>8} {'max rel diff':>13}")
    for name, fn in cases.items():
        res = {}
        for backend in ("numba", "numpy"):
            _accel.set_backend(backend)
            fn()  # warm-up / compile
            res[backend] = best_of(fn, args.repeat)
        (tn, on), (tp, op) = res["numba"], res["numpy"]
        print(f"{name:<38} {tn:>10.4f} {tp:>10.4f} {tp / tn:>8.2f} {rel_diff(on, op):>13.2e}")
    _accel.set_backend("numba")


if __name__ == "__main__":
    main()
