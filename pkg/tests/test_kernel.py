import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, special, stats

from fracspde import green as gr
from fracspde import kernel as kn
from fracspde.errors import DomainError
from fracspde.green import GreenKind
from fracspde.kernel import GreenHandle, KernelConstants, ReferenceKernel, ReferenceKind

P = GreenKind.PRIMARY
FRACTIONAL = [0.25, 0.5, 0.75, 1.25, 1.5, 1.75]


# ---------------------------------------------------------------- reference kernels


def test_reference_kernel_examples():
    assert kn.reference_kernel(ReferenceKernel(ReferenceKind.EXPONENTIAL, 0.5), 1.0, 0.0) == 0.5
    assert_allclose(ReferenceKernel(ReferenceKind.GAUSSIAN, 1.0)(1.0, 0.0), (4 * math.pi) ** -0.5, rtol=1e-15)
    val, _ = integrate.quad(lambda x: ReferenceKernel("poisson", 2.0)(1.0, x), -np.inf, np.inf, epsabs=1e-12)
    assert_allclose(val, 1.0, rtol=1e-8)
    with pytest.raises(DomainError):
        ReferenceKernel(ReferenceKind.GAUSSIAN)(0.0, 1.0)
    with pytest.raises(DomainError):
        ReferenceKernel(ReferenceKind.EXPONENTIAL, 0.5, dimension=2)


@pytest.mark.parametrize("kind", list(ReferenceKind))
@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("t", [0.3, 2.0])
def test_reference_kernel_unit_mass(kind, beta, t):
    rk = ReferenceKernel(kind, beta)
    val, _ = integrate.quad(lambda x: rk(t, x), -np.inf, np.inf, epsabs=1e-12, limit=200)
    assert_allclose(val, 1.0, rtol=1e-7)
    assert np.all(rk(t, np.linspace(-20, 20, 101)) >= 0)


@pytest.mark.parametrize("kind", list(ReferenceKind))
def test_reference_kernel_scaling(kind):
    rk = ReferenceKernel(kind, 0.8)
    t, x = 3.7, np.linspace(-5, 5, 11)
    g2 = rk.scale_exponent
    assert_allclose(rk(t, x), t**-g2 * rk(1.0, x / t**g2), rtol=1e-13)


def test_reference_dispatch():
    assert kn.reference_for_green(0.5).kind is ReferenceKind.EXPONENTIAL
    # beta = 1 belongs to the Gaussian branch
    assert kn.reference_for_green(1.0).kind is ReferenceKind.GAUSSIAN
    assert kn.reference_for_green(1.5).kind is ReferenceKind.GAUSSIAN
    assert kn.lower_reference_for_green(0.5).kind is ReferenceKind.LOWER_GAUSS
    with pytest.raises(DomainError):
        kn.lower_reference_for_green(1.0)
    with pytest.raises(DomainError):
        kn.reference_for_green(2.0)


def test_subsemigroup_examples():
    lhs, rhs = kn.subsemigroup_check(ReferenceKernel(ReferenceKind.GAUSSIAN, 1.0), 0.7, 1.3, 0.4)
    assert_allclose(lhs, rhs, rtol=1e-9)
    rk = ReferenceKernel(ReferenceKind.EXPONENTIAL, 0.5)
    lhs, rhs = kn.subsemigroup_check(rk, 1.0, 1.0, 0.0)
    assert_allclose(lhs, kn.exponential_convolution(0.5, 1.0, 1.0, 0.0), rtol=1e-9)
    assert_allclose(rhs, kn.hat_c(0.5) * rk(2.0, 0.0), rtol=1e-15)
    assert lhs <= rhs


@pytest.mark.parametrize("x", [0.0, 1.0, 5.0, 10.0, 20.0])
@pytest.mark.parametrize("kind,beta", [("exponential", 0.5), ("exponential", 1.5), ("gaussian", 1.5), ("poisson", 1.0)])
def test_subsemigroup_inequality(kind, beta, x):
    rk = ReferenceKernel(kind, beta)
    for t, s in [(1.0, 1.0), (0.2, 3.0)]:
        lhs, rhs = kn.subsemigroup_check(rk, t, s, x)
        assert lhs <= rhs * (1 + 1e-9)


@pytest.mark.parametrize("x", [0.0, 0.7, 3.0])
def test_exponential_convolution_closed_form(x):
    rk = ReferenceKernel(ReferenceKind.EXPONENTIAL, 0.6)
    for t, s in [(1.0, 2.0), (1.0, 1.0)]:
        val, _ = integrate.quad(lambda y: rk(t, x - y) * rk(s, y), -np.inf, np.inf, points=None, epsabs=1e-13, limit=400)
        assert_allclose(kn.exponential_convolution(0.6, t, s, x), val, rtol=1e-7)


def test_lower_gauss_sup_semigroup():
    rk = ReferenceKernel(ReferenceKind.LOWER_GAUSS, 0.5)
    for x in (0.0, 1.0, 3.0):
        lhs, rhs = kn.subsemigroup_check(rk, 1.0, 0.5, x)
        assert lhs >= rhs


# ---------------------------------------------------------------- constants


def test_hat_c_examples():
    assert_allclose(kn.hat_c(2.0), 2 * math.exp(-0.5), rtol=1e-15)
    assert kn.hat_c(2.0) == pytest.approx(1.21306, abs=1e-5)
    assert_allclose(kn.hat_c(1.0), (2 + math.sqrt(2)) * math.exp(-1 / math.sqrt(2)), rtol=1e-15)
    assert kn.hat_c(1.0) == pytest.approx(1.68344, abs=1e-5)
    grid = np.linspace(0.01, 2.0, 200)
    vals = [kn.hat_c(b) for b in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_tilde_c_examples():
    assert kn.tilde_c(1.0) == 1.0
    assert_allclose(kn.tilde_c(1.5), 2**0.25, rtol=1e-15)
    assert kn.tilde_c(0.5) == kn.hat_c(0.5)
    with pytest.raises(DomainError):
        kn.tilde_c(2.0)


def test_psi_examples():
    assert_allclose(kn.psi(1.0), (4 * math.pi) ** -0.5, rtol=1e-8)
    for beta in FRACTIONAL:
        rk = kn.reference_for_green(beta)
        at_zero = gr.green(beta, P, 1.0, 0.0) ** 2 / rk(1.0, 0.0)
        assert kn.psi(beta) >= at_zero * (1 - 1e-14)
    assert kn.psi(0.5, lower=True) > 0
    with pytest.raises(DomainError):
        kn.psi(1.0, lower=True)
    with pytest.raises(DomainError):
        kn.psi(2.0)


@pytest.mark.parametrize("beta", FRACTIONAL)
def test_domination_of_squared_green(beta):
    rng = np.random.default_rng(11)
    t = rng.uniform(0.05, 5.0, 500)
    x = rng.uniform(-12.0, 12.0, 500)
    sigma = gr.as_index(beta).sigma
    g2 = gr.green(beta, P, t, x) ** 2
    ref = kn.reference_for_green(beta)(t, x)
    assert np.all(g2 <= kn.psi(beta) * t ** (-sigma) * ref * (1 + 1e-9))
    if beta < 1:
        low = kn.lower_reference_for_green(beta)(t, x)
        assert np.all(g2 >= kn.psi(beta, lower=True) * t ** (-beta / 2) * low * (1 - 1e-9))


def test_kernel_constants():
    kc = KernelConstants(0.3, 1.2, 0.5)
    assert_allclose(kc.gamma, 0.3 * 1.2 * math.sqrt(math.pi), rtol=1e-15)
    assert_allclose(kc.upsilon, kc.gamma**2, rtol=1e-15)
    with pytest.raises(DomainError):
        KernelConstants(0.3, 1.2, 1.0)
    with pytest.raises(DomainError):
        KernelConstants(0.0, 1.2, 0.5)


def test_bn_examples():
    kc = KernelConstants(0.4, 1.3, 0.25)
    assert_allclose(kn.bn(1, 2.0, kc), 0.4 * 2.0**-0.25, rtol=1e-14)
    t = 1.7
    total = math.fsum(kn.bn(n, t, kc) for n in range(1, 200))
    a = 1 - kc.sigma
    # the sum carries 1/C1 in front of gamma t^-sigma E_{a,a}(gamma t^a)
    closed = kc.gamma / kc.c1 * t**-kc.sigma * kn.mittag_leffler((a, a), kc.gamma * t**a)
    assert_allclose(total, closed, rtol=1e-12)
    ratios = [kn.bn(n, t, kc) / kn.bn(n - 1, t, kc) for n in (10, 40, 160)]
    assert ratios[0] > ratios[1] > ratios[2] and ratios[2] < 0.2
    for m in (1, 2):
        assert math.isfinite(math.fsum(kn.bn(n, t, kc) ** (1 / m) for n in range(1, 400)))
    with pytest.raises(DomainError):
        kn.bn(0, 1.0, kc)


# ---------------------------------------------------------------- bounds


def test_kernel_upper_heat_structure():
    lam = 1.7
    kc = kn.upper_constants(1.0, lam)
    assert kc.sigma == 0.5
    assert_allclose(kc.gamma, lam**2 / 2, rtol=1e-8)
    r = kn.kernel_upper(1.0, lam, 1.0, 0.3)
    assert r.regime is kn.Regime.UPPER
    assert kn.kernel_upper(1.0, lam, 1.0, 60.0).value_bound == 0.0


def test_kernel_upper_fast_sigma():
    kc = kn.upper_constants(1.5, 1.0)
    assert kc.sigma == pytest.approx(-1.25)
    assert kn.kernel_upper(1.5, 1.0, 3.0, 0.0).value_bound > kn.kernel_upper(1.5, 1.0, 1.0, 0.0).value_bound


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("t", [1e-3, 0.1, 1.0, 10.0, 50.0])
def test_mittag_form_below_exp_form(beta, t):
    r = kn.kernel_upper(beta, 1.0, t, 0.5)
    assert 0 <= r.mittag_form <= r.exp_form * (1 + 1e-9)


def test_kernel_upper_decays_in_space():
    vals = [kn.kernel_upper(0.5, 1.0, 1.0, x).value_bound for x in (0.0, 5.0, 50.0, 500.0)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-100


def test_kernel_lower_examples():
    for t in (0.2, 1.0, 3.0):
        for x in (0.0, 1.0, 4.0):
            lo = kn.kernel_lower(0.5, 1.0, t, x)
            up = kn.kernel_upper(0.5, 1.0, t, x)
            assert 0 < lo.value_bound <= up.value_bound
            assert lo.exp_form <= lo.mittag_form * (1 + 1e-9)
    kc = kn.lower_constants(0.5, 1.0)
    assert kn.constant_lower(kc) > 0
    small = kn.kernel_lower(0.5, 1.0, 1e-5, 1.0)
    ref = kn.lower_reference_for_green(0.5)(1e-5, 1.0)
    assert small.exp_form == pytest.approx(kn.constant_lower(kc) * ref, rel=1e-3)
    with pytest.raises(DomainError):
        kn.kernel_lower(1.0, 1.0, 1.0, 0.0)


# ---------------------------------------------------------------- exact kernels


def test_heat_exact_structure():
    expected = kn.heat_kernel(1.0, 1.0, 0.0) * ((8 * math.pi) ** -0.5 + 0.25 * stats.norm.cdf(0.5) * math.exp(1 / 8))
    assert_allclose(kn.kernel_heat_exact(2.0, 1.0, 1.0, 0.0), expected, rtol=1e-14)
    assert kn.kernel_heat_exact(2.0, 1.0, 1e-6, 1.0) < 1e-100


def test_biharmonic_examples():
    assert_allclose(kn.BIHARMONIC_GAMMA, (8 * math.pi) ** -0.5 * special.gamma(2.5), rtol=1e-15)
    hd = GreenHandle.biharmonic()
    assert hd.sigma == -1.5 and hd.c1 == 1.0
    assert_allclose(hd.c0, (8 * math.pi) ** -0.5, rtol=1e-15)
    assert kn.kernel_biharmonic_exact(1.0, 80.0) < 1e-300
    t = 1e-3
    lead = hd.c0 * t**1.5 * kn.heat_kernel(1.0, t, 0.01)
    assert_allclose(kn.kernel_biharmonic_exact(t, 0.01), lead, rtol=1e-3)


# ---------------------------------------------------------------- series


@pytest.fixture(scope="module")
def heat_series():
    return GreenHandle.heat(2.0)


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("x", [0.0, 0.5, 1.0])
def test_heat_series_matches_closed_form(heat_series, t, x):
    sums, tail = kn.kernel_series_numeric(heat_series, 1.0, t, x, 8)
    assert_allclose(sums[-1], kn.kernel_heat_exact(2.0, 1.0, t, x), rtol=2e-2)
    assert tail >= 0


def test_heat_series_terms_are_equalities(heat_series):
    kc = heat_series.constants(1.0)
    terms = kn.kernel_series_terms(heat_series, 1.0, 0.7, 0.4, 4)
    for n, ln in enumerate(terms):
        assert_allclose(ln, kn.bn(n + 1, 0.7, kc) * heat_series.reference(0.7, 0.4), rtol=1e-2)


def test_biharmonic_series_matches_closed_form():
    hd = GreenHandle.biharmonic()
    sums, _ = kn.kernel_series_numeric(hd, 1.0, 1.0, 0.3, 6)
    assert_allclose(sums[-1], kn.kernel_biharmonic_exact(1.0, 0.3), rtol=2e-2)


@pytest.mark.parametrize("beta", [0.5, 1.5])
def test_fractional_series_terms(beta):
    hd = GreenHandle.fractional(beta)
    kc = hd.constants(1.0)
    t = 0.8
    for x in (0.0, 0.6, 2.0):
        terms = kn.kernel_series_terms(hd, 1.0, t, x, 4)
        for n, ln in enumerate(terms):
            assert ln >= -1e-10 * terms[0]
            assert ln <= kn.bn(n + 1, t, kc) * hd.reference(t, x) * (1 + 2e-2)
    sums, tail = kn.kernel_series_numeric(hd, 1.0, t, 0.0, 4)
    diffs = np.diff(sums)
    assert np.all(diffs[1:] < diffs[:-1])
    assert sums[-1] <= kn.kernel_upper(beta, 1.0, t, 0.0).value_bound


def test_series_first_term_is_squared_green():
    hd = GreenHandle.fractional(0.5)
    l0 = kn.kernel_series_terms(hd, 1.3, 0.9, 0.4, 4)[0]
    assert_allclose(l0, 1.3**2 * gr.green(0.5, P, 0.9, 0.4) ** 2, rtol=1e-3)


def test_series_rejects_bad_order(heat_series):
    with pytest.raises(DomainError):
        kn.kernel_series_numeric(heat_series, 1.0, 1.0, 0.0, 0)
    with pytest.raises(DomainError):
        GreenHandle.fractional(0.5, GreenKind.STAR)
