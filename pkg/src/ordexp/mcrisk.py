"""Monte Carlo risk, relative risk improvement and Pitman-closeness estimates.

Replication r at grid point i draws its data from a counter-based stream keyed
by (seed, i, r), so results do not depend on how replications are split over
worker threads. Within one (eta, replication) every estimator sees the same
dataset (common random numbers).
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels, sigma1, sigma2
from .errors import ValidationError
from .kernel import constants
from .losses import STANDARD_LOSSES, Loss, loss_eval, validate_loss_domain

log = logging.getLogger(__name__)

TARGET_OF = {**{e: "sigma1" for e in sigma1.ESTIMATORS}, **{e: "sigma2" for e in sigma2.ESTIMATORS}}
BASELINE = {"sigma1": "delta01", "sigma2": "delta02"}
IMPROVED = ("delta11", "delta12", "delta13", "delta14", "bz1", "delta21", "delta22", "deltaD", "bz2")
DEFAULT_ESTIMATORS = ("delta01", "delta11", "delta12", "delta13", "delta14", "bz1", "pitman1",
                      "delta02", "delta21", "delta22", "deltaD", "bz2", "pitman2")
GPC_PAIRS = (("pitman1", "delta01"), ("pitman1_pcaee", "pcaee1"),
             ("pitman2", "delta02"), ("pitman2_pcaee", "pcaee2"))
CSV_COLUMNS = ("eta", "p1", "p2", "mu1", "mu2", "k", "loss", "estimator",
               "risk", "rri", "mc_se", "reps", "seed")
BLOCK = 8192
MAX_RESAMPLE = 64


def default_eta_grid() -> tuple:
    return tuple(float(x) for x in np.linspace(0.05, 1.0, 20))


def default_threads() -> int:
    env = os.environ.get("ORDEXP_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"ORDEXP_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValidationError("ORDEXP_THREADS must be at least 1")
        return n
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class SimConfig:
    p1: int
    p2: int
    mu1: float = 0.0
    mu2: float = 0.0
    sigma2: float = 1.0
    eta_grid: tuple = field(default_factory=default_eta_grid)
    k: float = 2.0
    losses: tuple = STANDARD_LOSSES
    estimators: tuple = DEFAULT_ESTIMATORS
    reps: int = 90_000
    seed: int = 20240611

    def __post_init__(self):
        object.__setattr__(self, "eta_grid", tuple(float(e) for e in self.eta_grid))
        object.__setattr__(self, "losses", tuple(self.losses))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.p1 < 2 or self.p2 < 2:
            raise ValidationError(f"sample sizes must be at least 2 (p1={self.p1}, p2={self.p2})")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValidationError(f"sigma2 must be positive, got {self.sigma2}")
        if not (self.k > 0 and math.isfinite(self.k)):
            raise ValidationError(f"k must be positive, got {self.k}")
        if not self.eta_grid:
            raise ValidationError("eta grid is empty")
        for eta in self.eta_grid:
            if not 0.0 < eta <= 1.0:
                raise ValidationError(f"eta must lie in (0, 1] so that sigma1 <= sigma2, got {eta}")
        if self.reps < 1000:
            raise ValidationError(f"reps must be at least 1000, got {self.reps}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if not self.losses:
            raise ValidationError("no losses requested")
        unknown = [e for e in self.estimators if e not in TARGET_OF]
        if unknown:
            raise ValidationError(f"unknown estimators: {', '.join(unknown)}")
        if not self.estimators:
            raise ValidationError("no estimators requested")
        for loss in self.losses:
            for p in (self.p1, self.p2):
                validate_loss_domain(loss, p + self.k - 1, self.k).raise_if_bad()
            constants(self.p1, self.p2, self.k, loss)


@dataclass(frozen=True)
class RiskRow:
    eta: float
    p1: int
    p2: int
    mu1: float
    mu2: float
    k: float
    loss: str
    estimator: str
    risk: float
    rri: float
    mc_se: float
    reps: int
    seed: int
    rri_se: float = math.nan  # paired-difference se of rri; not written to CSV

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass(frozen=True)
class GpcRow:
    eta: float
    loss: str
    estimator: str
    baseline: str
    probability: float
    se: float
    reps: int


def sample_population(p: int, mu: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """p draws of mu + sigma Exp(1) by inverse CDF."""
    if p < 1:
        raise ValidationError("p must be positive")
    u = rng.random(p)
    return mu - sigma * np.log1p(-u)


# ---------------------------------------------------------------- replication blocks

def _sample_block(cfg: SimConfig, eta_index: int, eta: float, start: int, n: int):
    sigma1_true = eta * cfg.sigma2
    args = (cfg.p1, cfg.p2, cfg.mu1, cfg.mu2, sigma1_true, cfg.sigma2)
    x1, x2, s1, s2 = kernels.sample_stats(cfg.seed, eta_index, start, n, *args)
    bad = np.flatnonzero(~((s1 > 0) & (s2 > 0)))
    for i in bad:
        for attempt in range(1, MAX_RESAMPLE + 1):
            r = kernels.sample_stats(cfg.seed, eta_index, start + i, 1, *args, attempt=attempt)
            if r[2][0] > 0 and r[3][0] > 0:
                x1[i], x2[i], s1[i], s2[i] = (v[0] for v in r)
                break
        else:
            raise ValidationError(f"replication {start + i} stayed degenerate after resampling")
    if bad.size:
        log.info("eta=%g: resampled %d degenerate replications", eta, bad.size)
    return x1, x2, s1, s2, int(bad.size)


def _block_losses(cfg, eta_index, eta, start, n, ids, loss: Loss):
    """Per-replication losses L(delta / sigma_target^k) for each estimator id."""
    x1, x2, s1, s2, nbad = _sample_block(cfg, eta_index, eta, start, n)
    ids1 = [e for e in ids if TARGET_OF[e] == "sigma1"]
    ids2 = [e for e in ids if TARGET_OF[e] == "sigma2"]
    out = {}
    k = cfg.k
    if ids1:
        mult = sigma1.multipliers_batch(x1, x2, s1, s2, cfg.p1, cfg.p2, k, loss, ids1)
        ratio = (s1 / (eta * cfg.sigma2)) ** k
        for e in ids1:
            out[e] = loss_eval(loss, mult[e] * ratio)
    if ids2:
        mult = sigma2.multipliers_batch(x1, x2, s1, s2, cfg.p1, cfg.p2, k, loss, ids2)
        ratio = (s2 / cfg.sigma2) ** k
        for e in ids2:
            out[e] = loss_eval(loss, mult[e] * ratio)
    return out, nbad


def _run_blocks(cfg: SimConfig, eta_index: int, eta: float, ids, loss, threads: int):
    starts = list(range(0, cfg.reps, BLOCK))

    def job(start):
        return _block_losses(cfg, eta_index, eta, start, min(BLOCK, cfg.reps - start), ids, loss)

    if threads <= 1 or len(starts) == 1:
        results = [job(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, starts))  # map keeps block order
    merged = {e: np.concatenate([r[0][e] for r in results]) for e in ids}
    return merged, sum(r[1] for r in results)


def _with_baselines(ids):
    needed = list(ids)
    for e in ids:
        base = BASELINE[TARGET_OF[e]]
        if base not in needed:
            needed.append(base)
    return needed


def simulate_risk(cfg: SimConfig, threads: int | None = None) -> list[RiskRow]:
    """Risk, RRI (percent, against the BAEE of the same target) and MC standard error.

    Rows are ordered by eta, then loss, then estimator as listed in ``cfg``.
    """
    threads = default_threads() if threads is None else threads
    ids = _with_baselines(cfg.estimators)
    rows = []
    n = cfg.reps
    for i, eta in enumerate(cfg.eta_grid):
        for loss in cfg.losses:
            losses, _ = _run_blocks(cfg, i, eta, ids, loss, threads)
            risk = {e: math.fsum(v) / n for e, v in losses.items()}
            for e in cfg.estimators:
                v = losses[e]
                base_id = BASELINE[TARGET_OF[e]]
                base = risk[base_id]
                se = float(np.std(v, ddof=1)) / math.sqrt(n)
                if e == base_id:
                    rri = rri_se = 0.0
                else:
                    rri = 100.0 * (base - risk[e]) / base
                    diff_sd = float(np.std(losses[base_id] - v, ddof=1))
                    rri_se = 100.0 * diff_sd / math.sqrt(n) / base
                rows.append(RiskRow(eta, cfg.p1, cfg.p2, cfg.mu1, cfg.mu2, cfg.k, loss.label,
                                    e, risk[e], rri, se, n, cfg.seed, rri_se))
    return rows


def gpc_estimate(cfg: SimConfig, est_a: str, est_b: str, threads: int | None = None) -> list[GpcRow]:
    """P[L(A/sigma^k) < L(B/sigma^k)] + P[tie]/2 per (eta, loss), with its standard error."""
    for e in (est_a, est_b):
        if e not in TARGET_OF:
            raise ValidationError(f"unknown estimator {e!r}")
    if TARGET_OF[est_a] != TARGET_OF[est_b]:
        raise ValidationError(f"{est_a} and {est_b} estimate different targets")
    threads = default_threads() if threads is None else threads
    ids = [est_a] if est_a == est_b else [est_a, est_b]
    rows = []
    for i, eta in enumerate(cfg.eta_grid):
        for loss in cfg.losses:
            losses, _ = _run_blocks(cfg, i, eta, ids, loss, threads)
            a, b = losses[est_a], losses[est_b]
            score = np.where(a < b, 1.0, np.where(a == b, 0.5, 0.0))
            prob = float(score.mean())
            se = float(np.std(score, ddof=1)) / math.sqrt(cfg.reps)
            rows.append(GpcRow(eta, loss.label, est_a, est_b, prob, se, cfg.reps))
    return rows


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[RiskRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([_fmt(v) for v in r.as_tuple()])
    return buf.getvalue()


def write_csv(rows: list[RiskRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path) -> list[RiskRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValidationError(f"{path}: unexpected columns {reader.fieldnames}")
        out = []
        for rec in reader:
            out.append(RiskRow(
                float(rec["eta"]), int(rec["p1"]), int(rec["p2"]), float(rec["mu1"]),
                float(rec["mu2"]), float(rec["k"]), rec["loss"], rec["estimator"],
                float(rec["risk"]), float(rec["rri"]), float(rec["mc_se"]),
                int(rec["reps"]), int(rec["seed"]),
            ))
    return out
