import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsop.operators import (
    BoundaryGuardError,
    InnerFunctionSpec,
    KernelOrder,
    SymbolSpec,
    SymbolTerm,
    bergman_projection,
    berezin,
    berezin_image,
    hankel_image,
    hankel_little,
    inner_derivative,
    inner_eval,
    inner_taylor,
    toeplitz_conj_coeff,
    toeplitz_quad,
    toeplitz_quad_many,
)
from wsop.pseries import CoefficientSeries, random_polynomial
from wsop.quad import PolydiskRule, TorusRule

ONE = SymbolSpec.constant(1.0)
XI = SymbolSpec.monomial((1,))
XI_BAR = SymbolSpec.monomial((0,), (1,))
Z = CoefficientSeries.monomial([1])


def interior_points(n, count, rmax, seed):
    rng = np.random.default_rng(seed)
    r = rmax * np.sqrt(rng.uniform(size=(count, n)))
    return r * np.exp(2j * np.pi * rng.uniform(size=(count, n)))


def test_symbol_basics():
    s = SymbolSpec((SymbolTerm(2, (1, 0), (0, 1)), SymbolTerm(-1j, (0, 0), (0, 0))))
    assert s.dim == 2 and not s.holomorphic and not s.antiholomorphic
    z = (0.3 + 0.1j, -0.2j)
    assert s(*z) == pytest.approx(2 * z[0] * np.conj(z[1]) - 1j)
    assert s.conj()(*z) == pytest.approx(np.conj(s(*z)))
    assert SymbolSpec.from_json(s.to_json()) == s
    assert s.degrees() == ((1, 0), (0, 1))
    assert XI.holomorphic and XI_BAR.antiholomorphic
    assert SymbolSpec.monomial((0,), (1,), 0.5).sup_norm() == pytest.approx(0.5)


def test_kernel_order_domain():
    with pytest.raises(ValueError):
        KernelOrder((-1.5,))
    assert KernelOrder((0.5,)).of_dim(3) == (0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        KernelOrder((0.5, 1.0)).of_dim(3)


# Toeplitz ---------------------------------------------------------------


def test_toeplitz_coeff_examples():
    z2 = CoefficientSeries.monomial([2])
    np.testing.assert_array_equal(toeplitz_conj_coeff(z2, XI).trimmed().coeffs, [0, 1])
    f = random_polynomial(2, 3, np.random.default_rng(0))
    np.testing.assert_array_equal(toeplitz_conj_coeff(f, SymbolSpec.constant(1.0, 2)).coeffs, f.coeffs)
    assert np.all(toeplitz_conj_coeff(CoefficientSeries.constant(1.0), XI).coeffs == 0)
    with pytest.raises(ValueError):
        toeplitz_conj_coeff(z2, XI_BAR)


def test_toeplitz_quad_examples():
    z2 = CoefficientSeries.monomial([2])
    assert toeplitz_quad(z2, XI_BAR, (0.3,), TorusRule((16,))) == pytest.approx(0.3, abs=1e-15)
    f = random_polynomial(1, 6, np.random.default_rng(1))
    for z in (0.0, 0.5j, -0.9 + 0.05j):
        assert toeplitz_quad(f, ONE, (z,)) == pytest.approx(f(z), abs=1e-13)
    assert abs(toeplitz_quad(CoefficientSeries.constant(1.0), XI_BAR, (0.4,))) < 1e-15


def test_toeplitz_quad_refuses_coarse_rule():
    f = random_polynomial(1, 8, np.random.default_rng(2))
    with pytest.raises(ValueError, match="too coarse"):
        toeplitz_quad(f, XI_BAR, (0.1,), TorusRule((16,)))


@st.composite
def toeplitz_pairs(draw):
    n = draw(st.integers(1, 2))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    f = random_polynomial(n, int(rng.integers(0, 9)), rng)
    h = random_polynomial(n, int(rng.integers(0, 5)), rng)
    return f, SymbolSpec.from_series(h), rng


@given(toeplitz_pairs())
@settings(max_examples=25, deadline=None)
def test_toeplitz_oracle_agreement(pair):
    f, h, rng = pair
    n = f.dim
    d = max(f.degrees) + max(max(a) for a in h.degrees())
    rule = TorusRule((2 * d + 2 if d else 4,) * n)
    pts = interior_points(n, 25, 0.95, int(rng.integers(1 << 31)))
    quad_vals = toeplitz_quad_many(f, h.conj(), pts, rule)
    exact = toeplitz_conj_coeff(f, h)(*pts.T)
    scale = max(1.0, np.max(np.abs(exact)))
    assert np.max(np.abs(quad_vals - exact)) <= 1e-10 * scale


# kernel operators -----------------------------------------------------


@pytest.mark.parametrize("z", [0.0, 0.5, 0.9j, -0.6 + 0.6j])
def test_hankel_examples(z):
    one = CoefficientSeries.constant(1.0)
    assert hankel_little(one, ONE, 0.0, (z,)) == pytest.approx(math.pi, abs=1e-8)
    assert abs(hankel_little(Z, ONE, 0.0, (z,))) < 1e-12
    assert hankel_little(Z, XI_BAR, 0.0, (0.0,)) == pytest.approx(math.pi / 2, rel=1e-12)


def test_hankel_callable_matches_polynomial_path():
    f = random_polynomial(1, 4, np.random.default_rng(3))
    g = SymbolSpec((SymbolTerm(0.5, (0,), (1,)), SymbolTerm(0.2, (1,), (2,))))
    pts = interior_points(1, 6, 0.9, 4)
    a = hankel_little(f, g, 0.7, pts)
    b = hankel_little(lambda z: f(z), lambda z: g(z), 0.7, pts)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_projection_examples():
    assert bergman_projection(CoefficientSeries.constant(1.0), 0.0, (0.3j,)) == pytest.approx(1.0, abs=1e-12)
    assert abs(bergman_projection(np.conj, 0.0, (0.5,))) < 1e-12
    assert bergman_projection(Z, 0.0, (0.4,)) == pytest.approx(0.4, abs=1e-8)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.5])
def test_projection_reproduces_polynomials(alpha):
    f = random_polynomial(1, 8, np.random.default_rng(5))
    pts = interior_points(1, 10, 0.9, 6)
    np.testing.assert_allclose(bergman_projection(f, alpha, pts), f(pts[:, 0]), atol=1e-8)
    f2 = random_polynomial(2, 4, np.random.default_rng(7))
    pts2 = interior_points(2, 5, 0.9, 8)
    np.testing.assert_allclose(bergman_projection(f2, alpha, pts2), f2(*pts2.T), atol=1e-8)


def test_berezin_examples():
    one = CoefficientSeries.constant(1.0)
    for z in (0.0, 0.3, 0.9j):
        assert berezin(one, ONE, 0.0, (z,)) == pytest.approx(1.0, abs=1e-6)
    assert abs(berezin(Z, ONE, 0.0, (0.0,))) < 1e-14
    assert berezin(one, ONE, 1.0, (0.5,)) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("n", [1, 2])
def test_berezin_normalised(alpha, n):
    one = CoefficientSeries.constant(1.0, n)
    pts = interior_points(n, 8, 0.9, 9)
    pts[0] = 0.9
    vals = berezin(one, SymbolSpec.constant(1.0, n), alpha, pts)
    np.testing.assert_allclose(vals, 1.0, atol=1e-6)


def test_boundary_guard():
    with pytest.raises(BoundaryGuardError):
        berezin(Z, ONE, 0.0, (0.97,))
    rule = PolydiskRule.uniform(1, 128, 2048)
    val = berezin(CoefficientSeries.constant(1.0), ONE, 0.0, (0.97,), rule=rule, guard=None)
    assert val == pytest.approx(1.0, abs=1e-6)


@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
@settings(max_examples=15, deadline=None)
def test_operators_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    f1, f2 = random_polynomial(1, 5, rng), random_polynomial(1, 5, rng)
    mix = CoefficientSeries(a * f1.coeffs + b * f2.coeffs)
    g = SymbolSpec((SymbolTerm(0.5, (0,), (1,)), SymbolTerm(0.3, (1,), (0,))))
    pts = interior_points(1, 4, 0.9, seed % 1000)
    for op in (
        lambda f: hankel_little(f, g, 1.0, pts),
        lambda f: berezin(f, g, 1.0, pts),
        lambda f: bergman_projection(f, 1.0, pts),
    ):
        lhs, rhs = op(mix), a * op(f1) + b * op(f2)
        scale = max(1.0, np.max(np.abs(rhs)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_berezin_positive(seed):
    p = random_polynomial(1, 4, np.random.default_rng(seed))
    pts = interior_points(1, 6, 0.9, seed % 1000)
    vals = berezin(lambda z: np.abs(p(z)) ** 2, lambda z: np.abs(z), 0.5, pts)
    assert np.all(vals.real >= 0)
    assert np.all(np.abs(vals.imag) <= 1e-12 * np.maximum(1.0, vals.real))


def test_hankel_image_is_conjugate_polynomial():
    f = random_polynomial(1, 5, np.random.default_rng(10))
    g = SymbolSpec((SymbolTerm(0.5, (0,), (1,)), SymbolTerm(0.25, (2,), (3,))))
    x = np.linspace(-0.6, 0.6, 5)
    grid = (x[:, None] + 1j * x[None, :]).ravel()
    vals = hankel_little(f, g, 0.5, grid[:, None])
    # least-squares fit in conj(z) up to the highest conjugate degree in play
    deg = 3
    V = np.conj(grid)[:, None] ** np.arange(deg + 1)[None, :]
    coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
    assert np.max(np.abs(V @ coef - vals)) <= 1e-8
    img = hankel_image(f, g, 0.5)
    assert img.antiholomorphic
    np.testing.assert_allclose(img(grid), vals, atol=1e-10)


@pytest.mark.parametrize("n, alpha", [(1, 0.0), (1, 1.5), (2, 1.0)])
def test_berezin_image_matches_quadrature(n, alpha):
    f = random_polynomial(n, 3, np.random.default_rng(11))
    zero = (0,) * n
    g = SymbolSpec((SymbolTerm(0.5, zero, (1,) + zero[1:]), SymbolTerm(0.1, (1,) + zero[1:], zero)))
    pts = interior_points(n, 6, 0.9, 12)
    img = berezin_image(f, g, alpha)
    np.testing.assert_allclose(img(*pts.T), berezin(f, g, alpha, pts), atol=1e-10)


def test_berezin_reproduces_holomorphic_functions():
    f = random_polynomial(1, 6, np.random.default_rng(13))
    pts = interior_points(1, 6, 0.9, 14)
    np.testing.assert_allclose(berezin_image(f, ONE, 1.0)(pts[:, 0]), f(pts[:, 0]), atol=1e-10)


# inner functions --------------------------------------------------------


def test_inner_examples():
    assert inner_eval(InnerFunctionSpec(((0.0,),)), (0.5,)) == pytest.approx(0.5)
    assert abs(inner_eval(InnerFunctionSpec(((0.5,),)), (0.5,))) < 1e-15
    J = InnerFunctionSpec(((0.5, 0.3j), (-0.2 + 0.4j,)))
    rng = np.random.default_rng(15)
    for _ in range(10):
        xi = np.exp(2j * np.pi * rng.uniform(size=2))
        assert abs(inner_eval(J, xi)) == pytest.approx(1.0, abs=1e-14)
    assert InnerFunctionSpec.from_json(J.to_json()) == J
    assert J.degrees == (2, 1)


def test_inner_taylor_and_derivative():
    J = InnerFunctionSpec(((0.7, -0.4j),))
    series = inner_taylor(J, 80)
    z = 0.55 * np.exp(0.4j)
    assert abs(series(z) - J(z)) <= series.tail_bound + 1e-13
    h = 1e-5
    fd = (J(z + h) - J(z - h)) / (2 * h)
    assert inner_derivative(J, (1,), (z,)) == pytest.approx(fd, rel=1e-8)
