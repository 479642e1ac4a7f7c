import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from ordexp import sigma1
from ordexp.errors import DomainError
from ordexp.losses import ENTROPY, QUADRATIC, SYMMETRIC, LossSpec
from ordexp.model import EstimationConfig, RawDataset, SufficientStats, summarize

Q = EstimationConfig(2.0, QUADRATIC)
E = EstimationConfig(2.0, ENTROPY)
S = EstimationConfig(2.0, SYMMETRIC)


def test_delta01_values(case_stats):
    assert sigma1.delta01(case_stats, Q).value == pytest.approx(609**2 / 56, rel=1e-12)
    assert sigma1.delta01(case_stats, E).value == pytest.approx(609**2 / 30, rel=1e-12)
    assert sigma1.delta01(case_stats, S).value == pytest.approx(609**2 / math.sqrt(360), rel=1e-12)


def test_stein_examples(case_stats):
    t = 403 / 609
    r11 = sigma1.stein_sigma1("delta11", case_stats, Q)
    assert r11.multiplier == pytest.approx((1 + t) ** 2 / 156, rel=1e-12)
    assert r11.truncation_active
    r12 = sigma1.stein_sigma1("delta12", case_stats, Q)
    assert r12.multiplier == pytest.approx((1 + t + 6 * 5 / 609) ** 2 / 182, rel=1e-12)
    assert r12.value == pytest.approx(5965.7, rel=5e-4)
    r13 = sigma1.stein_sigma1("delta13", case_stats, Q)
    assert not r13.truncation_active and r13.multiplier == pytest.approx(1 / 56)
    assert sigma1.stein_sigma1("delta14", case_stats, E).value == pytest.approx(8214, rel=5e-4)


def test_stein_fallback_without_positive_minima():
    s = SufficientStats(0.0, 0.0, 10.0, 1.0, 6, 6)
    for v in ("delta12", "delta13", "delta14"):
        r = sigma1.stein_sigma1(v, s, Q)
        assert r.multiplier == pytest.approx(1 / 56) and not r.truncation_active
    with pytest.raises(DomainError):
        sigma1.stein_sigma1("delta15", s, Q)


stats_strategy = st.builds(
    SufficientStats,
    st.floats(0, 50), st.floats(0, 50), st.floats(0.1, 500), st.floats(0.1, 500),
    st.integers(4, 12), st.integers(4, 12),
)


@settings(max_examples=150, deadline=None)
@given(stats_strategy, st.sampled_from([Q, E, S]))
def test_pointwise_truncation(s, cfg):
    base = sigma1.delta01(s, cfg)
    for v in sigma1.STEIN_VARIANTS:
        r = sigma1.stein_sigma1(v, s, cfg)
        assert r.value <= base.value
        assert (r.value == base.value) == (not r.truncation_active)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=3, max_size=8, unique=True),
       st.lists(st.floats(0, 100), min_size=3, max_size=8, unique=True),
       st.floats(0.1, 10), st.floats(-20, 20), st.floats(-20, 20))
def test_scale_equivariance_and_location_invariance(pop1, pop2, c, b1, b2):
    raw = summarize(RawDataset.from_sequences(pop1, pop2))
    scaled = summarize(RawDataset.from_sequences([c * v for v in pop1], [c * v for v in pop2]))
    shifted = summarize(RawDataset.from_sequences([v + b1 for v in pop1], [v + b2 for v in pop2]))
    for eid in ("delta01", "delta11", "delta12", "delta14", "bz1", "pitman1"):
        a = sigma1.estimate(eid, raw, Q).value
        assert sigma1.estimate(eid, scaled, Q).value == pytest.approx(c**2 * a, rel=1e-8)
    for eid in ("delta11", "bz1"):
        assert sigma1.estimate(eid, shifted, Q).value == pytest.approx(
            sigma1.estimate(eid, raw, Q).value, rel=1e-8)


def test_bz_case_value(case_stats):
    r = sigma1.bz_sigma1(case_stats, Q)
    assert r.multiplier == pytest.approx(0.0128586, rel=1e-4)
    assert r.value == pytest.approx(4769.1, rel=2e-3)


@pytest.mark.parametrize("cfg", [Q, E, S], ids=["L1", "L2", "L3"])
def test_bz_methods_agree(cfg):
    for t in (0.01, 0.3, 0.661741, 2.0, 40.0):
        b = sigma1.bz_multiplier_sigma1(t, 6, 6, cfg, "beta")
        for m in ("quadrature", "generic"):
            assert sigma1.bz_multiplier_sigma1(t, 6, 6, cfg, m) == pytest.approx(b, rel=1e-9)


def test_truncated_beta_integral_oracle():
    for a, t in ((12.0, 0.5), (14.0, 3.0), (9.0, 50.0)):
        ref, _ = integrate.quad(lambda u: u**4 * (1 + u) ** (-a), 0, t, epsrel=1e-13)
        assert sigma1.truncated_beta_integral(a, t, 6) == pytest.approx(ref, rel=1e-10)
    # closed form at infinity: B(p2-1, a-p2+1)
    big = sigma1.truncated_beta_integral(12.0, 1e8, 6)
    assert big == pytest.approx(special.beta(5, 7), rel=1e-8)


@pytest.mark.parametrize("cfg", [Q, E, S], ids=["L1", "L2", "L3"])
def test_bz_monotone_and_bounded(cfg):
    ts = np.geomspace(1e-3, 1e4, 60)
    phi = sigma1.bz1_batch(ts, 6, 6, 2.0, cfg.loss)
    d01 = sigma1.delta01(SufficientStats(0, 0, 1, 1, 6, 6), cfg).multiplier
    assert np.all(np.diff(phi) >= 0)
    # strictly increasing until it saturates at d01 in double precision
    assert np.all(np.diff(phi[ts < 50]) > 0)
    assert np.all(phi <= d01 * (1 + 1e-12))
    assert sigma1.bz_multiplier_sigma1(1e6, 6, 6, cfg) == pytest.approx(d01, rel=1e-5)


def test_bz_generic_linex():
    loss = LossSpec("linex", -1.0)
    cfg = EstimationConfig(2.0, loss)
    m = sigma1.bz_multiplier_sigma1(0.7, 6, 6, cfg)
    assert abs(sigma1.bz1_residual(m, 0.7, 6, 6, 2.0, loss)) < 1e-10
    assert 0 < m < sigma1.delta01(SufficientStats(0, 0, 1, 1, 6, 6), cfg).multiplier


def test_bz_domain_diagnostic():
    with pytest.raises(DomainError):
        sigma1.bz_multiplier_sigma1(0.5, 3, 6, EstimationConfig(2.0, SYMMETRIC))
    with pytest.raises(DomainError):
        sigma1.bz_multiplier_sigma1(-1.0, 6, 6, Q)


def test_pitman_bounds():
    q = stats.gamma(10).median()
    lo, hi = sigma1.pitman_bounds_sigma1(0.661741, 6, 6, 2.0)
    assert lo == pytest.approx(q**-2, rel=1e-10) and lo == pytest.approx(0.0106966, rel=1e-4)
    assert hi == pytest.approx((1.661741 / q) ** 2, rel=1e-10)
    assert hi == pytest.approx(0.0295393, rel=1e-4)
    assert hi / lo == pytest.approx(1.661741**2, rel=1e-12)
    lo0, hi0 = sigma1.pitman_bounds_sigma1(1e-12, 6, 6, 2.0)
    assert hi0 == pytest.approx(lo0, rel=1e-10)


def test_pitman_estimates(case_stats):
    r = sigma1.pitman_estimate_sigma1("baee", case_stats, Q)
    assert r.multiplier == pytest.approx(1 / 56) and not r.truncation_active
    m01 = stats.gamma(5).median() ** -2
    assert m01 == pytest.approx(0.045837, rel=1e-4)
    r = sigma1.pitman_estimate_sigma1("pcaee", case_stats, Q)
    assert r.truncation_active and r.multiplier == pytest.approx(0.0295393, rel=1e-4)
    wide = SufficientStats(0, 0, 1.0, 1e3, 6, 6)
    r = sigma1.pitman_estimate_sigma1("pcaee", wide, Q)
    assert not r.truncation_active and r.multiplier == pytest.approx(m01, rel=1e-10)
    with pytest.raises(DomainError):
        sigma1.pitman_estimate_sigma1("other", case_stats, Q)


def test_estimate_dispatch(case_stats):
    for eid in sigma1.ESTIMATORS:
        r = sigma1.estimate(eid, case_stats, Q)
        assert r.estimator_id == eid and r.target == "sigma1"
        assert r.as_dict()["loss"] == "quadratic"
    with pytest.raises(DomainError):
        sigma1.estimate("delta02", case_stats, Q)


@pytest.mark.parametrize("cfg", [Q, E, S], ids=["L1", "L2", "L3"])
def test_batch_matches_scalar(cfg):
    rng = np.random.default_rng(5)
    n = 40
    x1, x2 = rng.exponential(3, n), rng.exponential(3, n)
    x1[:5] = 0.0
    x2[3:8] = 0.0
    s1, s2 = rng.gamma(5, 50, n), rng.gamma(5, 50, n)
    batch = sigma1.multipliers_batch(x1, x2, s1, s2, 6, 6, 2.0, cfg.loss)
    for i in range(n):
        s = SufficientStats(x1[i], x2[i], s1[i], s2[i], 6, 6)
        for eid in sigma1.ESTIMATORS:
            assert batch[eid][i] == pytest.approx(sigma1.estimate(eid, s, cfg).multiplier, rel=1e-10)
