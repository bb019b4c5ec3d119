import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta as beta_fn

from wsop.pseries import CoefficientSeries, random_polynomial
from wsop.quad import (
    DiskRule,
    GradedDiskRule,
    PolydiskRule,
    QuadratureError,
    TorusRule,
    integrate_polydisk,
    integrate_torus,
    norm_ap,
    norm_besov,
    norm_lp_grid,
    parallel_map,
    thread_count,
)
from wsop.weights import CoordWeight, WeightSpec

DISK = PolydiskRule.uniform(1, 64, 128)
ONE = WeightSpec.unweighted()
LINEAR = WeightSpec.power(1.0)


def test_integrate_polydisk_examples():
    assert integrate_polydisk(lambda z: np.ones_like(z), DISK) == pytest.approx(math.pi, rel=1e-14)
    assert integrate_polydisk(lambda z: abs(z) ** 2, DISK) == pytest.approx(math.pi / 2, rel=1e-14)
    assert abs(integrate_polydisk(lambda z: z, DISK)) < 1e-14
    area2 = integrate_polydisk(lambda z, w: np.ones(np.broadcast(z, w).shape), PolydiskRule.uniform(2, 8, 8))
    assert area2 == pytest.approx(math.pi ** 2, rel=1e-13)


@pytest.mark.parametrize("s", range(9))
@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0])
def test_beta_moments(s, alpha):
    # the algebraic boundary factor goes into the Jacobi exponent; (1+|z|)**alpha is smooth
    rule = DISK.with_gammas([alpha])
    got = integrate_polydisk(lambda z: abs(z) ** (2 * s) * (1 + abs(z)) ** alpha, rule)
    assert got.real == pytest.approx(math.pi * beta_fn(s + 1, alpha + 1), rel=1e-10)


def test_torus_examples():
    rule = TorusRule((16,))
    for k in range(-5, 6):
        avg = integrate_torus(lambda x: x ** k, rule)
        assert avg == pytest.approx(1.0 if k == 0 else 0.0, abs=1e-15)
    assert integrate_torus(lambda x: np.conj(x) * x, rule) == pytest.approx(1.0)
    assert integrate_torus(lambda x: 1 / (1 - 0.5 * x), TorusRule((64,))) == pytest.approx(1.0, abs=1e-15)


def test_torus_rule_minimum():
    with pytest.raises(ValueError):
        TorusRule((2,))


def test_norm_ap_examples():
    assert norm_ap(CoefficientSeries.constant(1.0), LINEAR, 2.0, DISK) == pytest.approx(math.sqrt(math.pi / 3), rel=1e-13)
    assert norm_ap(CoefficientSeries.constant(0.0), LINEAR, 2.0, DISK) == 0.0
    z = CoefficientSeries.monomial([1])
    assert norm_ap(z, ONE, 2.0, DISK) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)
    with pytest.raises(ValueError):
        norm_ap(z, ONE, 1.0, DISK)


def test_norm_besov_examples():
    z = CoefficientSeries.monomial([1])
    assert norm_besov(z, LINEAR, 2.0, DISK) == pytest.approx(math.sqrt(2 * math.pi / 5), rel=1e-13)
    assert norm_besov(CoefficientSeries.constant(0.0), LINEAR, 2.0, DISK) == 0.0
    c = CoefficientSeries.constant(3 - 4j)
    assert norm_besov(c, LINEAR, 2.0, DISK) == pytest.approx(5 * math.sqrt(math.pi / 3), rel=1e-13)


def test_norm_lp_grid_examples():
    assert norm_lp_grid(lambda z: np.ones_like(z), ONE, 2.0, DISK) == pytest.approx(math.sqrt(math.pi))
    assert norm_lp_grid(np.conj, ONE, 2.0, DISK) == pytest.approx(math.sqrt(math.pi / 2))
    assert norm_lp_grid(lambda z: 0 * z, ONE, 2.0, DISK) == 0.0


def test_weighted_integral_against_scipy():
    # independent radial check for a power-log weight, p = 3; the log factor
    # is not polynomial, so the Jacobi rule converges only algebraically
    from scipy.integrate import quad

    w = CoordWeight.powerlog(0.5, 1.0)
    f = CoefficientSeries(np.array([1.0, 0.5]))
    got = norm_ap(f, WeightSpec((w,)), 3.0, PolydiskRule.uniform(1, 512, 256))

    def radial(rho):
        th = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        ang = np.mean(np.abs(1 + 0.5 * rho * np.exp(1j * th)) ** 3) * 2 * np.pi
        return ang * rho * w(1 - rho)

    ref = quad(radial, 0, 1, limit=200, epsabs=1e-13, epsrel=1e-12)[0] ** (1 / 3)
    assert got == pytest.approx(ref, rel=1e-7)


def test_divergent_weight_refused():
    with pytest.raises(QuadratureError):
        norm_besov(CoefficientSeries.monomial([1]), ONE, 1.0, DISK)


def test_nonfinite_integrand_reported():
    with pytest.raises(QuadratureError, match="non-finite"):
        integrate_polydisk(lambda z: np.full_like(z, np.nan), DISK)


def test_graded_rule_handles_peaked_integrand():
    # |1 - r z|**-4 peaks near z = 1; its area integral is pi / (1 - r^2)**2
    r = 0.999
    rule = PolydiskRule((GradedDiskRule(order=16, scale=1 - r),))
    got = integrate_polydisk(lambda z: abs(1 - r * z) ** -4, rule)
    assert got.real == pytest.approx(math.pi / (1 - r * r) ** 2, rel=1e-8)


def test_rule_json_and_refine():
    rule = PolydiskRule.uniform(2, 8, 16)
    assert rule.refined().disks[0] == DiskRule(16, 32)
    assert rule.to_json()["coords"][0] == {"radial": 8, "angular": 16}


def test_parallel_map_preserves_order(monkeypatch):
    monkeypatch.setenv("WSOP_THREADS", "3")
    assert thread_count() == 3
    assert parallel_map(lambda x: x * x, list(range(20))) == [x * x for x in range(20)]
    monkeypatch.setenv("WSOP_THREADS", "0")
    assert thread_count() >= 1


@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 1e6), st.floats(0, 2 * math.pi), st.sampled_from([1.5, 2.0, 3.0]))
@settings(max_examples=25, deadline=None)
def test_norm_homogeneous(seed, mod, arg, p):
    c = mod * np.exp(1j * arg)
    f = random_polynomial(1, 5, np.random.default_rng(seed))
    w = WeightSpec.power(0.5)
    base = norm_ap(f, w, p, DISK)
    scaled = norm_ap(CoefficientSeries(c * f.coeffs), w, p, DISK)
    assert scaled == pytest.approx(mod * base, rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
@settings(max_examples=10, deadline=None)
def test_refinement_stable_for_polynomials(seed, n):
    f = random_polynomial(n, 8 if n == 1 else 4, np.random.default_rng(seed))
    w = WeightSpec.power(0.5, n)
    rule = PolydiskRule.uniform(n, 64, 128) if n == 1 else PolydiskRule.uniform(2, 24, 48)
    for norm in (norm_ap, norm_besov):
        a, b = norm(f, w, 2.0, rule), norm(f, w, 2.0, rule.refined())
        assert abs(a - b) <= 1e-8 * b


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 2.0), st.floats(0.0, 1.0))
@settings(max_examples=20, deadline=None)
def test_norm_monotone_in_weight(seed, a, da):
    # t**(a + da) <= t**a on (0, 1)
    f = random_polynomial(1, 4, np.random.default_rng(seed))
    small = norm_ap(f, WeightSpec.power(a + da), 2.0, DISK)
    big = norm_ap(f, WeightSpec.power(a), 2.0, DISK)
    assert small <= big * (1 + 1e-12)
