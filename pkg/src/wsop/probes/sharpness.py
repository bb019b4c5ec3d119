"""Sharpness sweep for the little Hankel threshold.

Test pair (one coordinate; products of these in several variables)::

    f_r(z) = C_r (1 - r z)^-k,   C_r = (1-r)^(k - 2/p) omega(1-r)^(-1/p),
    g_r    = exp(-i arg f_r),    so  f_r g_r = |f_r|.

The Hankel image of ``|f_r|`` concentrates on a ``(1-r)``-neighbourhood of
``z = 1``.  It is computed after recentring at ``r`` with the disk automorphism
``phi(w) = (r - w) / (1 - r w)``: with ``u = phi(z)``

    H(z) = (1 - r conj(u))^(alpha+2) sum_j d_j conj(u)^j nu_j,
    nu_j = int (1-|w|^2)^alpha w^j G(w) dm(w),
    G(w) = |f_r(phi(w))| (1 - r w)^(alpha+2) / |1 - r w|^(2 alpha + 4).

Here ``G = C (1 - r w)^(m + alpha + 2) (1 - r conj w)^m`` with
``m = (k - 2 alpha - 4) / 2``.  For a non-negative integer ``m`` only
``nu_0 .. nu_m`` are non-zero, and each is a finite Beta sum, so ``k`` is
restricted to that lattice.  Outer norms use a rule graded towards ``z = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, comb

from ..operators import kernel_coeffs
from ..quad import GradedDiskRule, PolydiskRule, norm_lp_grid
from ..weights import CoordWeight, WeightSpec, weight_indices
from .report import FAIL, INCONCLUSIVE, PASS, REFINE_TOL, ProbeReport

__all__ = [
    "SharpnessFamily",
    "default_k",
    "sharpness_ratio",
    "probe_hankel_sharpness",
    "DEFAULT_R_LIST",
]

DEFAULT_R_LIST = (0.9, 0.99, 0.999, 0.9999)
BOUNDED_SPREAD = 1.2
DIVERGING_GROWTH = 2.0
SLOPE_BAND = 0.30


def default_k(alpha: float, alpha_w: float, p: float, margin: float = 6.0) -> float:
    """Smallest ``k = 2 alpha + 4 + 2m`` (integer ``m >= 0``) with
    ``k >= max((alpha_w + 2)/p, alpha + 2) + margin``."""
    target = max((alpha_w + 2.0) / p, alpha + 2.0) + margin
    m = max(0, math.ceil((target - 2 * alpha - 4.0) / 2.0 - 1e-12))
    return 2 * alpha + 4.0 + 2 * m


@dataclass(frozen=True)
class SharpnessFamily:
    """One-coordinate member ``(f_r, g_r)`` of the counterexample family."""

    r: float
    k: float
    p: float
    weight: CoordWeight

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise ValueError("r must lie in (0, 1)")
        if not self.k > (self.weight.exponent + 2.0) / self.p:
            raise ValueError("k must exceed (alpha_omega + 2) / p")

    @property
    def C(self) -> float:
        t = 1.0 - self.r
        return t ** (self.k - 2.0 / self.p) * float(self.weight(t)) ** (-1.0 / self.p)

    def f(self, z):
        return self.C * (1.0 - self.r * np.asarray(z, dtype=complex)) ** (-self.k)

    def g(self, z):
        v = self.f(z)
        return np.exp(-1j * np.angle(v))

    def fg(self, z):
        return self.C * np.abs(1.0 - self.r * np.asarray(z, dtype=complex)) ** (-self.k)

    def rule(self, order: int = 16, gamma: float = 0.0) -> PolydiskRule:
        return PolydiskRule((GradedDiskRule(order, 1.0 - self.r, gamma=gamma),))

    def norm(self, order: int = 16) -> float:
        w = WeightSpec((self.weight,))
        return norm_lp_grid(self.f, w, self.p, self.rule(order))

    def moments(self, alpha: float) -> np.ndarray:
        """``nu_0 .. nu_m`` of the recentred integrand (all higher moments vanish)."""
        r, k = self.r, self.k
        m = (k - 2 * alpha - 4.0) / 2.0
        scale = self.C * (1.0 - r * r) ** (-k)
        if not (m >= 0 and abs(m - round(m)) < 1e-9):
            raise ValueError(
                f"k = {k:g} is not of the form 2*alpha + 4 + 2m (m = 0, 1, ...); "
                "only those exponents give a finite recentred moment expansion"
            )
        m = int(round(m))
        e = m + alpha + 2.0
        t = np.ones(m + 1)  # coefficients of (1 - r w)^e
        for i in range(1, m + 1):
            t[i] = t[i - 1] * (-r) * (e - i + 1) / i
        nu = np.zeros(m + 1)
        for j in range(m + 1):
            l = np.arange(j, m + 1)
            nu[j] = np.sum(comb(m, l) * (-r) ** l * t[l - j] * np.exp(betaln(l + 1.0, alpha + 1.0)))
        return scale * np.pi * nu

    def hankel_image(self, alpha: float):
        nu = self.moments(alpha)
        d = kernel_coeffs(alpha, np.arange(len(nu)))
        coef = d * nu
        r = self.r

        def image(z):
            z = np.asarray(z, dtype=complex)
            ub = np.conj((r - z) / (1.0 - r * z))
            poly = np.polynomial.polynomial.polyval(ub, coef)
            return (1.0 - r * ub) ** (alpha + 2.0) * poly

        return image

    def image_norm(self, alpha: float, order: int = 16) -> float:
        w = WeightSpec((self.weight,))
        return norm_lp_grid(self.hankel_image(alpha), w, self.p, self.rule(order))


def sharpness_ratio(
    r: float, alpha: float, p: float, weight: CoordWeight, k: float | None = None, order: int = 16
) -> tuple[float, float]:
    """``(||h_{g_r} f_r|| / ||f_r||, ||f_r||)`` in one coordinate."""
    k = default_k(alpha, weight.exponent, p) if k is None else k
    fam = SharpnessFamily(r, k, p, weight)
    fn = fam.norm(order)
    return fam.image_norm(alpha, order) / fn, fn


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    if len(x) < 2:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])


def _sweep_1d(alpha, p, weight, r_list, k, order, notes):
    """Per-r ratios and ``||f_r||`` with refinement screening."""
    kept, ratios, norms, moved = [], [], [], {}
    for r in r_list:
        ratio, fn = sharpness_ratio(r, alpha, p, weight, k, order)
        ratio2, fn2 = sharpness_ratio(r, alpha, p, weight, k, 2 * order)
        delta = max(abs(ratio2 / ratio - 1.0), abs(fn2 / fn - 1.0))
        moved[r] = delta
        if not (math.isfinite(ratio) and math.isfinite(fn)) or delta > REFINE_TOL:
            notes.append(f"r={r:g} dropped: rule doubling moved the ratio by {delta:.2%}")
            continue
        kept.append(r)
        ratios.append(ratio)
        norms.append(fn)
    return kept, ratios, norms, moved


def probe_hankel_sharpness(
    alpha: float | list[float],
    p: float,
    w: WeightSpec,
    r_list=DEFAULT_R_LIST,
    k: float | list[float] | None = None,
    order: int = 16,
    expect: str | None = None,
    alpha_scan=None,
) -> ProbeReport:
    """Norm ratios of the counterexample pair along ``r -> 1`` and the fitted log-log slope."""
    n = w.dim
    alphas = list(np.broadcast_to(np.atleast_1d(np.asarray(alpha, dtype=float)), (n,)))
    if any(a <= -1 for a in alphas):
        raise ValueError("alpha_j must exceed -1")
    if not p > 1:
        raise ValueError("p must exceed 1")
    if expect not in (None, "bounded", "diverging"):
        raise ValueError("expect must be 'bounded' or 'diverging'")
    r_list = tuple(float(r) for r in r_list)
    ks = [None] * n if k is None else list(np.broadcast_to(np.atleast_1d(k), (n,)))
    ks = [default_k(a, c.exponent, p) if kk is None else float(kk) for a, c, kk in zip(alphas, w.coords, ks)]
    idx = weight_indices(w)
    notes: list[str] = []
    if n > 1:
        notes.append("f_r, g_r and the weight factor over coordinates: ratios are products of 1-D ratios")

    per_coord = [_sweep_1d(a, p, c, r_list, kk, order, notes) for a, c, kk in zip(alphas, w.coords, ks)]
    kept = [r for r in r_list if all(r in pc[0] for pc in per_coord)]
    ratios = np.array([math.prod(pc[1][pc[0].index(r)] for pc in per_coord) for r in kept])
    norms = np.array([math.prod(pc[2][pc[0].index(r)] for pc in per_coord) for r in kept])

    a_star = [(aw + 1.0) / p - 1.0 for aw in idx.alpha_omega]
    diverge_cond = [(a + 2.0) * p < aw + 2.0 for a, aw in zip(alphas, idx.alpha_omega)]
    bounded_regime = all(a > t for a, t in zip(alphas, a_star))
    diverging_regime = any(diverge_cond)
    predicted = sum(
        (aw + 2.0 - (a + 2.0) * p) / p
        for a, aw, c in zip(alphas, idx.alpha_omega, diverge_cond)
        if c
    )

    x = np.log(1.0 / (1.0 - np.array(kept)))
    y = np.log(ratios) if len(ratios) else np.array([])
    slope = _fit_slope(x, y)
    local = float((y[-1] - y[-2]) / (x[-1] - x[-2])) if len(kept) >= 2 else math.nan
    growth = math.nan
    if len(kept) >= 2:
        ref = 0.999 if 0.999 in kept else kept[-1]
        growth = float(ratios[kept.index(ref)] / ratios[0])
    spread = float(ratios.max() / ratios.min()) if len(ratios) else math.nan
    norm_band = float(norms.max() / norms.min()) if len(norms) else math.nan

    regime = "bounded" if bounded_regime else ("diverging" if diverging_regime else "gap")
    target = expect or (regime if regime != "gap" else None)
    if len(kept) < 2:
        verdict = INCONCLUSIVE
        notes.append("fewer than two reliable r values")
    elif target is None:
        verdict = INCONCLUSIVE
        notes.append("alpha lies between the divergence condition and the stated threshold")
    elif target == "bounded":
        verdict = PASS if spread <= BOUNDED_SPREAD else FAIL
    else:
        slope_ok = predicted > 0 and abs(slope - predicted) <= SLOPE_BAND * predicted
        if predicted <= 0:
            slope_ok = slope > 0
            notes.append("no predicted slope outside the divergence condition; requiring a positive slope")
        verdict = PASS if growth >= DIVERGING_GROWTH and slope_ok else FAIL
    if len(norms) and norm_band > 2.0:
        notes.append(f"||f_r|| varies by a factor {norm_band:.3g} across the sweep")
        if verdict == PASS:
            verdict = FAIL

    scan = None
    if alpha_scan is not None and n == 1:
        scan = _alpha_scan(list(alpha_scan), p, w.coords[0], r_list, order)

    samples = []
    for r, q, fn in zip(kept, ratios, norms):
        samples.append((f"ratio_r{r:g}", float(q)))
        samples.append((f"fnorm_r{r:g}", float(fn)))
    summary = {
        "alpha_star": a_star,
        "divergence_condition": diverge_cond,
        "regime": regime,
        "expect": target,
        "predicted_slope": predicted,
        "fitted_slope": slope,
        "last_decade_slope": local,
        "growth": growth,
        "ratio_spread": spread,
        "fnorm_band": norm_band,
        "kept_r": kept,
        "refinement_delta": {f"{r:g}": max(pc[3][r] for pc in per_coord) for r in r_list},
    }
    if scan is not None:
        summary["alpha_scan"] = scan
    params = {
        "alpha": alphas,
        "p": p,
        "weight": w.to_json(),
        "r_list": list(r_list),
        "k": ks,
        "order": order,
        "expect": expect,
    }
    return ProbeReport("hankel-sharpness", params, samples, summary, verdict, notes)


def _alpha_scan(alphas, p, weight, r_list, order):
    """Last-decade slopes over a list of alpha; ``alpha_hat`` is the first alpha
    (ascending) whose slope is below 0.02."""
    rows = []
    for a in sorted(alphas):
        rs = [r_list[-2], r_list[-1]] if len(r_list) >= 2 else list(r_list)
        vals = [sharpness_ratio(r, a, p, weight, None, order)[0] for r in rs]
        xs = [math.log(1.0 / (1.0 - r)) for r in rs]
        s = (math.log(vals[1]) - math.log(vals[0])) / (xs[1] - xs[0]) if len(rs) == 2 else math.nan
        rows.append({"alpha": a, "last_decade_slope": s})
    hat = next((row["alpha"] for row in rows if row["last_decade_slope"] < 0.02), None)
    return {"rows": rows, "alpha_hat": hat}
