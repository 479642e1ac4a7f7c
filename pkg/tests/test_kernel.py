import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy import integrate, special, stats

from ordexp.errors import DomainError
from ordexp.kernel import (
    baee_constant,
    closed_form,
    constants,
    pcaee_constant,
    psi_residual,
    psi_solve,
    psi_solve_generic,
    umvue_constant,
)
from ordexp.losses import ENTROPY, QUADRATIC, SYMMETRIC, CustomLoss, LossSpec


def ratio(a, b):
    return math.exp(special.gammaln(a) - special.gammaln(b))


def test_examples():
    assert psi_solve(12, 2, QUADRATIC) == pytest.approx(1 / 156, rel=1e-13)
    assert psi_solve(10, 2, ENTROPY) == pytest.approx(1 / 72, rel=1e-13)
    for a in (1.5, 3.0, 17.0):
        assert psi_solve(a, 1, QUADRATIC) == pytest.approx(1 / a, rel=1e-13)


@pytest.mark.parametrize("loss,expected", [
    (QUADRATIC, 1 / 56), (ENTROPY, 1 / 30), (SYMMETRIC, math.sqrt(1 / 360)),
])
def test_baee_p6(loss, expected):
    assert baee_constant(6, 2, loss) == pytest.approx(expected, rel=1e-13)


def test_umvue():
    assert umvue_constant(6, 2) == pytest.approx(1 / 30, rel=1e-13)
    assert umvue_constant(3, 1) == pytest.approx(0.5, rel=1e-13)
    for p in (2, 5, 9):
        for k in (0.5, 1.0, 2.5):
            assert umvue_constant(p, k) == pytest.approx(baee_constant(p, k, ENTROPY), rel=1e-13)


def test_pcaee_constant():
    assert pcaee_constant(6, 2) == pytest.approx(stats.gamma(5).median() ** -2, rel=1e-10)


# symmetric loss needs a > 2k
GRID = [(loss, a, k) for loss in (QUADRATIC, ENTROPY, SYMMETRIC)
        for a in (2.5, 4.0, 7.0, 13.0) for k in (0.5, 1.0, 2.0)
        if loss is not SYMMETRIC or a > 2 * k]


@pytest.mark.parametrize("loss,a,k", GRID)
def test_generic_matches_closed_form(loss, a, k):
    exact = closed_form(a, k, loss)
    assert psi_solve_generic(a, k, loss) == pytest.approx(exact, rel=1e-8)


@pytest.mark.parametrize("a,k", [(4.0, 1.0), (7.0, 2.0), (13.0, 0.5)])
def test_residual_vanishes(a, k):
    c = psi_solve(a, k, QUADRATIC)
    # independent oracle: scipy quad of E[L'(c Y^k)] with L' = t - 1
    val, _ = integrate.quad(lambda y: (c * y**k - 1) * stats.gamma(a).pdf(y), 0, np.inf)
    assert abs(val) < 1e-8
    assert abs(psi_residual(c, a, k, QUADRATIC)) < 1e-8


def test_quadratic_monotone():
    for a in (3.0, 6.0, 11.0):
        ks = np.linspace(0.25, 3.0, 12)
        cs = [psi_solve(a, k, QUADRATIC) for k in ks]
        assert all(x > y for x, y in zip(cs, cs[1:]))
    for k in (0.5, 2.0):
        cs = [psi_solve(a, k, QUADRATIC) for a in np.linspace(1.5, 20, 15)]
        assert all(x > y for x, y in zip(cs, cs[1:]))


@pytest.mark.parametrize("alpha", [-2.0, -0.5, 0.5, 1.0])
def test_linex_k1(alpha):
    loss = LossSpec("linex", alpha)
    a = 6.0
    exact = closed_form(a, 1, loss)
    # E exp(alpha c Y) = exp(alpha) for Y ~ Gamma(a)
    assert (1 - alpha * exact) ** (-a) == pytest.approx(math.exp(alpha), rel=1e-12)
    assert psi_solve_generic(a, 1, loss) == pytest.approx(exact, rel=1e-8)


def test_linex_general_k():
    loss = LossSpec("linex", -1.0)
    a, k = 7.0, 2.0
    c = psi_solve(a, k, loss)
    val, _ = integrate.quad(
        lambda y: (math.exp(-c * y**k) - 1) * stats.gamma(a).pdf(y), 0, np.inf)
    # L'(t) = alpha (exp(alpha (t - 1)) - 1); zero mean of exp(alpha t) - exp(alpha)
    lhs, _ = integrate.quad(lambda y: math.exp(-c * y**k) * stats.gamma(a).pdf(y), 0, np.inf)
    assert lhs == pytest.approx(math.exp(-1.0), rel=1e-8)
    assert val == pytest.approx(math.exp(-1.0) - 1, rel=1e-8)


def test_custom_loss_matches_quadratic():
    custom = CustomLoss("sq", lambda t: (t - 1) ** 2, lambda t: 2 * (t - 1))
    assert psi_solve(9.0, 2, custom) == pytest.approx(ratio(9, 11), rel=1e-8)


def test_domain_errors():
    with pytest.raises(DomainError):
        psi_solve(3.0, 2, SYMMETRIC)
    with pytest.raises(DomainError):
        baee_constant(1, 2, QUADRATIC)
    with pytest.raises(DomainError):
        umvue_constant(4, 0)


def test_constants_bundle():
    c = constants(6, 6, 2.0, QUADRATIC)
    d = c.as_dict()
    assert d["d01"] == d["d02"] == pytest.approx(1 / 56)
    assert d["alpha1"] == d["beta1"] == pytest.approx(1 / 156)
    assert d["alpha2"] == d["alpha3"] == pytest.approx(1 / 182)
    assert d["alpha4"] == pytest.approx(ratio(14, 16))
    assert d["beta2"] == pytest.approx(1 / 72)
    assert d["pitman_median"] == pytest.approx(stats.gamma(10).median(), rel=1e-10)
    assert d["umvue1"] == pytest.approx(1 / 30)
    assert c.alpha1 < c.d01 and c.beta1 < c.d02


def test_cache_thread_safe():
    args = [(2.0 + 0.37 * i, 1.5) for i in range(40)]
    with ThreadPoolExecutor(8) as pool:
        got = list(pool.map(lambda x: psi_solve(x[0], x[1], QUADRATIC), args * 3))
    ref = [ratio(a, a + k) for a, k in args] * 3
    assert got == pytest.approx(ref, rel=1e-13)
