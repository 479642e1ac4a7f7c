"""Data reduction for two shifted-exponential samples.

Population i has density exp(-(x - mu_i)/sigma_i)/sigma_i on x > mu_i. The
complete sufficient statistic is (X1, X2, S1, S2) with X_i the sample minimum
and S_i = sum_j (x_ij - X_i).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateDataError, DomainError, IOFailure, ValidationError
from .losses import QUADRATIC, Loss


@dataclass(frozen=True)
class RawDataset:
    pop1: tuple
    pop2: tuple

    def __post_init__(self):
        for i, pop in ((1, self.pop1), (2, self.pop2)):
            if len(pop) < 2:
                raise ValidationError(
                    f"population {i} needs at least 2 observations, got {len(pop)}"
                )
            if not all(math.isfinite(v) for v in pop):
                raise ValidationError(f"population {i} contains non-finite values")

    @classmethod
    def from_sequences(cls, pop1: Sequence[float], pop2: Sequence[float]) -> "RawDataset":
        return cls(tuple(float(v) for v in pop1), tuple(float(v) for v in pop2))


@dataclass(frozen=True)
class SufficientStats:
    x1: float
    x2: float
    s1: float
    s2: float
    p1: int
    p2: int

    def scaled(self, c: float) -> "SufficientStats":
        return SufficientStats(c * self.x1, c * self.x2, c * self.s1, c * self.s2, self.p1, self.p2)


@dataclass(frozen=True)
class Pivots:
    t: float
    t1: float
    t2: float
    w: float
    w1: float


@dataclass(frozen=True)
class EstimationConfig:
    k: float = 2.0
    loss: Loss = QUADRATIC

    def __post_init__(self):
        # negative powers are not supported
        if not (self.k > 0 and math.isfinite(self.k)):
            raise DomainError(f"k must be a finite positive power, got {self.k}")


def _reduce(values, i):
    x = min(values)
    s = math.fsum(v - x for v in values)
    if not s > 0:
        raise DegenerateDataError(
            f"population {i}: all observations equal, centred sum S{i} = 0"
        )
    return x, s


def summarize(data: RawDataset) -> SufficientStats:
    x1, s1 = _reduce(data.pop1, 1)
    x2, s2 = _reduce(data.pop2, 2)
    return SufficientStats(x1, x2, s1, s2, len(data.pop1), len(data.pop2))


def pivots(stats: SufficientStats) -> Pivots:
    s1, s2 = stats.s1, stats.s2
    if not (s1 > 0 and s2 > 0):
        raise DegenerateDataError(f"pivots need S1, S2 > 0 (S1={s1}, S2={s2})")
    return Pivots(t=s2 / s1, t1=stats.x1 / s1, t2=stats.x2 / s1, w=s1 / s2, w1=stats.x2 / s2)


def mle_rate(values: Sequence[float]) -> float:
    """p / sum(x - min): rate of the fitted shifted exponential."""
    x = min(values)
    s = math.fsum(v - x for v in values)
    if not s > 0:
        raise DegenerateDataError("rate undefined for constant data")
    return len(values) / s


# ---------------------------------------------------------------- KS test

def kolmogorov_sf(lam: float, max_terms: int = 100, tol: float = 1e-12) -> float:
    """P(K > lam) for the Kolmogorov distribution: 2 sum (-1)^(j-1) exp(-2 j^2 lam^2)."""
    if lam <= 0:
        return 1.0
    a2 = -2.0 * lam * lam
    total = 0.0
    sign = 1.0
    for j in range(1, max_terms + 1):
        term = 2.0 * sign * math.exp(a2 * j * j)
        total += term
        if abs(term) < tol:
            return min(1.0, max(0.0, total))
        sign = -sign
    # alternating series has not settled: lam is tiny, p is 1
    return 1.0


def ks_test(sample: Sequence[float], location: float, rate: float) -> tuple[float, float]:
    """One-sample KS test against F(x) = 1 - exp(-rate (x - location)), x >= location.

    Returns (D, p) with the asymptotic p-value evaluated at
    (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ValidationError("KS test needs at least one observation")
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate}")
    cdf = np.where(x >= location, -np.expm1(-rate * (x - location)), 0.0)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    root_n = math.sqrt(n)
    p = kolmogorov_sf((root_n + 0.12 + 0.11 / root_n) * d)
    return d, p


# ---------------------------------------------------------------- CSV input

def parse_dataset_csv(text: str, source: str = "<input>") -> RawDataset:
    """Parse ``population,value`` CSV (population in {1, 2}, rows in any order)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError(f"{source}: empty file") from None
    header = [h.strip().lower().lstrip("﻿") for h in header]
    if header != ["population", "value"]:
        raise ValidationError(f"{source}: header must be 'population,value', got {','.join(header)}")
    pops: dict[int, list[float]] = {1: [], 2: []}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ValidationError(f"{source}:{lineno}: expected 2 fields, got {len(row)}")
        pop_txt, val_txt = row[0].strip(), row[1].strip()
        if pop_txt not in ("1", "2"):
            raise ValidationError(f"{source}:{lineno}: population must be 1 or 2, got {pop_txt!r}")
        try:
            value = float(val_txt)
        except ValueError:
            raise ValidationError(f"{source}:{lineno}: bad value {val_txt!r}") from None
        if not math.isfinite(value):
            raise ValidationError(f"{source}:{lineno}: non-finite value {val_txt!r}")
        pops[int(pop_txt)].append(value)
    for i in (1, 2):
        if len(pops[i]) < 2:
            raise ValidationError(
                f"{source}: population {i} has {len(pops[i])} rows, needs at least 2"
            )
    return RawDataset.from_sequences(pops[1], pops[2])


def read_dataset_csv(path) -> RawDataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror}") from None
    return parse_dataset_csv(text, source=str(path))


def proschan_dataset() -> RawDataset:
    """Air-conditioning failure times of Boeing 720 planes 7916 (pop 1) and 7907 (pop 2)."""
    text = resources.files("ordexp").joinpath("data/proschan.csv").read_text(encoding="utf-8")
    return parse_dataset_csv(text, source="proschan.csv")
