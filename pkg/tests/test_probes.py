import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import fftconvolve
from scipy.special import betaln, gammaln

from wsop.operators import InnerFunctionSpec, SymbolSpec, SymbolTerm
from wsop.probes import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    ProbeReport,
    SharpnessFamily,
    TestFamily,
    probe_berezin_bounded,
    probe_division,
    probe_hankel_bounded,
    probe_hankel_sharpness,
    probe_lemma1,
    probe_lemma2,
    probe_radial_identity,
    probe_toeplitz_bounded,
)
from wsop.probes.lemmas import lemma2_lhs, sample_grid
from wsop.probes.sharpness import default_k, sharpness_ratio
from wsop.pseries import CoefficientSeries, random_polynomial
from wsop.quad import PolydiskRule, norm_besov
from wsop.weights import CoordWeight, WeightSpec

HALF = CoordWeight.power(0.5)
W_HALF = WeightSpec((HALF,))


def _binomial(k, N, r):
    m = np.arange(N)
    return np.exp(gammaln(k + m) - gammaln(k) - gammaln(m + 1) + m * np.log(r))


def parseval_ratio(r, alpha, a, k):
    """Sharpness ratio for p = 2 and omega = t**a from Taylor coefficients alone.

    |f_r| = C |1 - r z|^-k = C |(1 - r z)^(-k/2)|^2, so the Hankel image has
    coefficients d_j mu_j with mu_j a correlation of binomial sequences, and
    both L^2 norms are weighted sums of |coefficient|^2.
    """
    N = int(60 / (1 - r)) + 200
    C = (1 - r) ** (k - 1) * (1 - r) ** (-a / 2)
    m = np.arange(N)
    mass = 2 * np.pi * np.exp(betaln(2 * m + 2, a + 1))
    nf2 = C ** 2 * np.sum(_binomial(k, N, r) ** 2 * mass)
    c = _binomial(k / 2, N, r)
    v = c * np.exp(betaln(m + 1, alpha + 1))
    mu = C * np.pi * fftconvolve(v, c[::-1])[N - 1:]
    d = np.exp(gammaln(alpha + 2 + m) - gammaln(alpha + 2) - gammaln(m + 1))
    nh2 = np.sum((d * mu) ** 2 * mass)
    return math.sqrt(nh2 / nf2), math.sqrt(nf2)


# radial identity --------------------------------------------------------


@pytest.mark.parametrize("k", [0, 1, 4, 9])
def test_radial_identity_monomial(k):
    rep = probe_radial_identity(CoefficientSeries.monomial([k]))
    assert rep.verdict == PASS and rep.summary["max_residual"] <= 1e-14


def test_radial_identity_random_2d():
    f = random_polynomial(2, 6, np.random.default_rng(0))
    rep = probe_radial_identity(f, order=32)
    assert rep.verdict == PASS and rep.summary["max_residual"] <= 1e-10


def test_scalar_radial_counter_check():
    rep = probe_radial_identity(CoefficientSeries.monomial([1, 1]))
    pts = sample_grid(2, 5, 0.9)
    expected = np.max(np.abs(pts[:, 0] * pts[:, 1])) / 3
    assert rep.summary["scalar_max_residual"] == pytest.approx(expected, abs=1e-12)


# lemma 1 -----------------------------------------------------------------


def test_lemma1_examples():
    assert probe_lemma1(CoefficientSeries.constant(2.0), (1,)).summary["sup_outer"] == 0.0
    rep = probe_lemma1(CoefficientSeries.monomial([1]), (1,))
    assert rep.verdict == PASS and rep.summary["sup_outer"] <= 1.0 + 1e-12
    rep = probe_lemma1(InnerFunctionSpec(((0.7,),)), (1,))
    assert rep.verdict == PASS and math.isfinite(rep.summary["sup_outer"])


def test_lemma1_two_dimensional():
    J = InnerFunctionSpec(((0.5, -0.3j), (0.6,)))
    rep = probe_lemma1(J, (1, 2), n_radial=24, n_angular=24)
    assert rep.verdict == PASS


# lemma 2 -----------------------------------------------------------------


@pytest.mark.parametrize("a, b, c", [(0.0, 3.0, 0.5), (0.5, 2.5, 0.0), (0.0, 4.0, 0.0)])
def test_lemma2_lhs_against_series(a, b, c):
    # int (1-|u|^2)^(a+c) |1 - x u|^-b dm = pi sum_m e_m^2 x^(2m) B(m+1, a+c+1)
    x = np.array([0.0, 0.3, 0.7, 0.9])
    m = np.arange(4000)
    e2 = np.exp(2 * (gammaln(b / 2 + m) - gammaln(b / 2) - gammaln(m + 1)) + betaln(m + 1, a + c + 1))
    ref = [math.pi * np.sum(e2 * xi ** (2 * m)) for xi in x]
    got = lemma2_lhs(a, b, CoordWeight.power(c), x, 64, 4096)
    np.testing.assert_allclose(got, ref, rtol=1e-9)


def test_lemma2_examples():
    rep = probe_lemma2(0.0, 3.0, HALF)
    assert rep.verdict == PASS and rep.summary["refinement_delta"] < 0.1
    rep = probe_lemma2(0.0, 2.2, HALF)
    assert rep.verdict == INCONCLUSIVE and not rep.summary["hypotheses_hold"]
    assert rep.summary["tail_trend"] > 1.5
    rep = probe_lemma2(0.0, 4.0, CoordWeight.power(0.0))
    assert rep.verdict == PASS
    assert rep.summary["sup_ratio"] == pytest.approx(math.pi, rel=1e-8)


# theorem probes --------------------------------------------------------


SMALL = TestFamily(count=6, degree=4)


def test_toeplitz_identity_symbol():
    rep = probe_toeplitz_bounded(SymbolSpec.constant(1.0), SMALL, 2.0, W_HALF)
    assert rep.verdict == PASS
    np.testing.assert_allclose([v for _, v in rep.samples], 1.0, rtol=1e-12)


def test_toeplitz_shift_ratio():
    fam = TestFamily(kind="monomials", degree=2)
    rep = probe_toeplitz_bounded(SymbolSpec.monomial((1,)), fam, 2.0, W_HALF)
    ratios = dict(rep.samples)
    rule = PolydiskRule.uniform(1, 64, 128)
    z, z2 = CoefficientSeries.monomial([1]), CoefficientSeries.monomial([2])
    expected = norm_besov(z, W_HALF, 2.0, rule) / norm_besov(z2, W_HALF, 2.0, rule)
    assert ratios["z^2"] == pytest.approx(expected, rel=1e-12)
    assert math.isfinite(rep.summary["max_ratio"])


def test_toeplitz_random_family():
    h = SymbolSpec((SymbolTerm(2 / 3, (0,), (0,)), SymbolTerm(1 / 3, (1,), (0,))))
    rep = probe_toeplitz_bounded(h, TestFamily(count=50, degree=8, seed=7), 2.0, W_HALF)
    assert rep.verdict == PASS
    assert rep.summary["family_delta"] < 0.1 and rep.summary["max_ratio"] <= 1.0 + 1e-9


def test_division_examples():
    one = InnerFunctionSpec.trivial(1)
    F = random_polynomial(1, 5, np.random.default_rng(1))
    assert probe_division(one, F, 2.0, W_HALF).summary["max_residual"] <= 1e-13
    rep = probe_division(InnerFunctionSpec(((0.0,),)), CoefficientSeries(np.array([1.0, 1.0])), 2.0, W_HALF)
    assert rep.summary["max_residual"] <= 1e-10
    rep = probe_division(InnerFunctionSpec(((0.5,),)), CoefficientSeries.monomial([2]), 2.0, W_HALF)
    assert rep.verdict == PASS and rep.summary["max_residual"] <= 1e-8


def test_hankel_constant_case():
    fam = TestFamily(kind="monomials", degree=0)
    rep = probe_hankel_bounded(SymbolSpec.constant(1.0), fam, 0.0, 2.0, WeightSpec.unweighted())
    assert rep.summary["max_ratio"] == pytest.approx(math.pi, rel=1e-12)


def test_zero_members_are_skipped():
    fam = TestFamily(kind="monomials", degree=1)
    g = SymbolSpec.monomial((1,), (0,))
    rep = probe_hankel_bounded(g, fam, 0.0, 2.0, WeightSpec.unweighted())
    # conj-kernel integral of z * zeta^k vanishes for every k >= 0, so every ratio is 0
    assert rep.summary["max_ratio"] == 0.0
    rep = probe_berezin_bounded(SymbolSpec.constant(0.0), fam, 0.0, 2.0, W_HALF)
    assert rep.summary["max_ratio"] == 0.0


def test_berezin_identity_ratio():
    fam = TestFamily(kind="monomials", degree=0)
    rep = probe_berezin_bounded(SymbolSpec.constant(1.0), fam, 0.0, 2.0, W_HALF)
    assert rep.summary["max_ratio"] == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("probe", [probe_hankel_bounded, probe_berezin_bounded])
def test_operator_probes_random_family(probe):
    g = SymbolSpec.monomial((0,), (1,), 0.5)
    rep = probe(g, TestFamily(count=10, degree=6), 1.0, 2.0, W_HALF)
    assert rep.verdict == PASS
    assert rep.summary["alpha_above_threshold"] == [True]


# sharpness ---------------------------------------------------------------


def test_default_k_lattice():
    assert default_k(-0.9, 0.5, 2.0) == pytest.approx(8.2)
    assert default_k(0.5, 0.5, 2.0) == pytest.approx(9.0)


@pytest.mark.parametrize("alpha", [-0.9, 0.5])
@pytest.mark.parametrize("r", [0.9, 0.99, 0.999])
def test_sharpness_ratio_matches_parseval_oracle(alpha, r):
    k = default_k(alpha, 0.5, 2.0)
    got, fn = sharpness_ratio(r, alpha, 2.0, HALF, k)
    ref, fref = parseval_ratio(r, alpha, 0.5, k)
    assert got == pytest.approx(ref, rel=1e-9)
    assert fn == pytest.approx(fref, rel=1e-9)


def test_sharpness_off_lattice_refused():
    with pytest.raises(ValueError, match="not of the form"):
        SharpnessFamily(0.9, 8.7, 2.0, HALF).moments(-0.9)


def test_sharpness_threshold_example():
    rep = probe_hankel_sharpness(0.5, 2.0, W_HALF, r_list=(0.9, 0.99, 0.999))
    assert rep.summary["alpha_star"] == [pytest.approx(-0.25)]
    assert rep.summary["ratio_spread"] < 1.2 and rep.verdict == PASS


def test_sharpness_diverging():
    rep = probe_hankel_sharpness(-0.9, 2.0, W_HALF)
    s = rep.summary
    assert s["regime"] == "diverging" and rep.verdict == PASS
    assert s["predicted_slope"] == pytest.approx(0.15)
    assert abs(s["fitted_slope"] - 0.15) <= 0.3 * 0.15
    assert s["growth"] >= 2 and s["fnorm_band"] <= 2


def test_sharpness_expect_bounded_fails():
    rep = probe_hankel_sharpness(-0.9, 2.0, W_HALF, expect="bounded")
    assert rep.verdict == FAIL


# reports -------------------------------------------------------------------


def test_report_serialisation(tmp_path):
    rep = ProbeReport("demo", {"x": np.float64(1.5), "z": 1 + 2j}, [("a", 1.0), ("b", math.nan)],
                      {"v": np.inf}, PASS, metadata={"t": "now"})
    data = json.loads(rep.canonical_json())
    assert data["params"]["z"] == [1.0, 2.0] and data["summary"]["v"] is None
    assert "metadata" not in data
    rep.write(tmp_path / "r.json")
    assert (tmp_path / "r.csv").read_text().splitlines()[0].startswith("id")
    assert json.loads((tmp_path / "r.json").read_text())["metadata"] == {"t": "now"}
    with pytest.raises(ValueError):
        ProbeReport("demo", {}, [], {}, "MAYBE")


@given(st.integers(0, 2**16), st.integers(1, 12))
@settings(max_examples=15, deadline=None)
def test_random_families_are_prefix_stable(seed, count):
    small = TestFamily(count=count, degree=3, seed=seed).members()
    big = TestFamily(count=count, degree=3, seed=seed).enlarged().members()
    assert len(big) == 2 * count
    for (i, f), (j, g) in zip(small, big):
        assert i == j and np.array_equal(f.coeffs, g.coeffs)


def test_probe_reports_deterministic():
    g = SymbolSpec.monomial((0,), (1,), 0.5)
    a = probe_berezin_bounded(g, SMALL, 1.0, 2.0, W_HALF)
    b = probe_berezin_bounded(g, SMALL, 1.0, 2.0, W_HALF)
    assert a.canonical_json() == b.canonical_json()
