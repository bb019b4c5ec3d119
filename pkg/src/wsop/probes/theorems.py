"""Boundedness probes for the Toeplitz, little Hankel and Berezin-type operators,
and the division probe for inner factors."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..operators import (
    InnerFunctionSpec,
    KernelOrder,
    SymbolSpec,
    berezin_image,
    hankel_image,
    toeplitz_conj_coeff,
    toeplitz_quad_many,
)
from ..pseries import CoefficientSeries
from ..quad import PolydiskRule, TorusRule, norm_ap, norm_besov, norm_lp_grid, parallel_map
from ..weights import WeightSpec, weight_indices
from .families import TestFamily
from .lemmas import sample_grid
from .report import FAIL, INCONCLUSIVE, PASS, ProbeReport, refinement_verdict, rel_change

__all__ = [
    "probe_toeplitz_bounded",
    "probe_division",
    "probe_hankel_bounded",
    "probe_berezin_bounded",
    "default_probe_rule",
]

FAMILY_TOL = 0.10


def default_probe_rule(n: int) -> PolydiskRule:
    """64 x 128 per coordinate in one dimension; coarser tensor rules beyond."""
    if n == 1:
        return PolydiskRule.uniform(1, 64, 128)
    if n == 2:
        return PolydiskRule.uniform(2, 24, 48)
    return PolydiskRule.uniform(n, 12, 24)


def _sweep(
    name: str,
    ratio: Callable[[CoefficientSeries, PolydiskRule], float],
    family: TestFamily,
    rule: PolydiskRule,
    cap: float | None,
    params: dict,
    extra_summary: dict,
    notes: list[str],
) -> ProbeReport:
    """Shared driver: ratios over the family, the enlarged family and a refined rule."""
    members = family.members()
    ids = [m[0] for m in members]
    big = family.enlarged()
    big_members = big.members()
    vals = parallel_map(lambda m: ratio(m[1], rule), big_members)
    by_id = dict(zip([m[0] for m in big_members], vals))
    base = [by_id[i] if i in by_id else ratio(f, rule) for i, f in members]

    def finite_max(xs):
        xs = [x for x in xs if x is not None]
        return max(xs) if xs else math.nan

    skipped = [i for i, v in zip(ids, base) if v is None]
    if skipped:
        notes.append(f"skipped {len(skipped)} zero-norm member(s): {', '.join(skipped[:5])}")
    max1 = finite_max(base)
    max2 = finite_max(vals)
    if big is family:
        notes.append(f"family kind {family.kind!r} has no enlargement; stability is trivial")
    family_delta = rel_change(max2, max1)
    if math.isnan(max1):
        return ProbeReport(name, params, [], {"max_ratio": None}, INCONCLUSIVE, notes + ["no usable members"])
    arg = ids[int(np.nanargmax([np.nan if v is None else v for v in base]))]
    f_arg = dict(members)[arg]
    refined = ratio(f_arg, rule.refined())
    movement = rel_change(by_id.get(arg, max1), refined)
    ok = math.isfinite(max1) and math.isfinite(max2) and family_delta < FAMILY_TOL
    if cap is not None:
        ok = ok and max2 <= cap
    verdict = refinement_verdict(PASS if ok else FAIL, movement, notes)
    samples = [(i, math.nan if v is None else v) for i, v in zip(ids, base)]
    summary = {
        "max_ratio": max1,
        "max_ratio_enlarged": max2,
        "family_size": len(members),
        "enlarged_size": len(big_members),
        "family_delta": family_delta,
        "argmax": arg,
        "argmax_ratio_refined": refined,
        "refinement_delta": movement,
        "cap": cap,
        **extra_summary,
    }
    return ProbeReport(name, params, samples, summary, verdict, notes)


def _safe_ratio(num: float, den: float) -> float | None:
    return None if den == 0 else num / den


def probe_toeplitz_bounded(
    h: SymbolSpec,
    family: TestFamily,
    p: float,
    w: WeightSpec,
    rule: PolydiskRule | None = None,
    cap: float | None = None,
) -> ProbeReport:
    """``max ||T_{conj h} f||_B / ||f||_B`` over the family (Besov norms, coefficient Toeplitz)."""
    if not h.holomorphic:
        raise ValueError("h must be a holomorphic polynomial symbol")
    if not p > 1:
        raise ValueError("p must exceed 1")
    n = w.dim
    rule = rule or default_probe_rule(n)
    sup_h = h.sup_norm()
    cap = 10.0 * sup_h if cap is None else cap
    idx = weight_indices(w)
    hyp = {
        "beta_omega<0": [b < 0 for b in idx.beta_omega],
        "p>=alpha_omega": [p >= a for a in idx.alpha_omega],
        "alpha_omega+beta_omega<0": [a + b < 0 for a, b in zip(idx.alpha_omega, idx.beta_omega)],
    }
    notes = ["theorem hypotheses are echoed only; the ratio is measured regardless"]

    def ratio(f, r):
        den = norm_besov(f, w, p, r)
        return _safe_ratio(norm_besov(toeplitz_conj_coeff(f, h), w, p, r), den)

    params = {"h": h.to_json(), "family": family.to_json(), "p": p, "weight": w.to_json(), "rule": rule.to_json()}
    return _sweep("toeplitz", ratio, family, rule, cap, params, {"sup_h": sup_h, "hypotheses": hyp}, notes)


def probe_division(
    J: InnerFunctionSpec,
    F: CoefficientSeries,
    p: float,
    w: WeightSpec,
    rule: TorusRule | None = None,
    per_coord: int = 5,
    rmax: float = 0.8,
) -> ProbeReport:
    """``sup |T_{conj J}(J F)(z) - F(z)|`` over a ``per_coord**n`` grid."""
    if J.dim != F.dim:
        raise ValueError("inner function and F dimensions differ")
    n = F.dim
    rule = rule or TorusRule((512,) * n)
    degree = max(d + z for d, z in zip(F.degrees, J.degrees))
    pts = sample_grid(n, per_coord, rmax)

    def run(r):
        vals = toeplitz_quad_many(
            lambda *x: J(*x) * F(*x), lambda *x: np.conj(J(*x)), pts, r, degree=degree
        )
        return np.abs(vals - F(*pts.T))

    resid = run(rule)
    resid2 = run(TorusRule(tuple(2 * m for m in rule.counts)))
    worst, worst2 = float(resid.max()), float(resid2.max())
    notes: list[str] = []
    verdict = PASS if worst <= 1e-8 else FAIL
    verdict = refinement_verdict(verdict, rel_change(worst, worst2, floor=1e-12), notes)
    fnorm = norm_besov(F, w, p, default_probe_rule(n))
    if not math.isfinite(fnorm):
        verdict = FAIL
        notes.append("||F||_B is not finite")
    samples = [(f"z{i}", v) for i, v in enumerate(resid)]
    summary = {"max_residual": worst, "max_residual_refined": worst2, "besov_norm_F": fnorm, "tolerance": 1e-8}
    params = {
        "J": J.to_json(),
        "F": F.to_json(),
        "p": p,
        "weight": w.to_json(),
        "torus": list(rule.counts),
        "grid_per_coord": per_coord,
        "grid_rmax": rmax,
    }
    return ProbeReport("division", params, samples, summary, verdict, notes)


def _threshold_flags(alpha: KernelOrder, p: float, w: WeightSpec) -> dict:
    idx = weight_indices(w)
    alphas = alpha.of_dim(w.dim)
    thresholds = [(a + 1) / p - 1 for a in idx.alpha_omega]
    return {
        "thresholds": thresholds,
        "alpha_above_threshold": [a > t for a, t in zip(alphas, thresholds)],
    }


def probe_hankel_bounded(
    g: SymbolSpec,
    family: TestFamily,
    alpha,
    p: float,
    w: WeightSpec,
    rule: PolydiskRule | None = None,
    cap: float | None = None,
) -> ProbeReport:
    """``max ||h_g f||_{L^p(omega)} / ||f||_{A^p(omega)}`` using the exact conjugate-polynomial image."""
    alpha = alpha if isinstance(alpha, KernelOrder) else KernelOrder(alpha)
    if not p > 1:
        raise ValueError("p must exceed 1")
    rule = rule or default_probe_rule(w.dim)
    flags = _threshold_flags(alpha, p, w)
    notes = ["image evaluated from its closed-form conjugate-polynomial expansion"]

    def ratio(f, r):
        den = norm_ap(f, w, p, r)
        img = hankel_image(f, g, alpha)
        return _safe_ratio(norm_lp_grid(img, w, p, r), den)

    params = {
        "g": g.to_json(),
        "family": family.to_json(),
        "alpha": list(alpha.alpha),
        "p": p,
        "weight": w.to_json(),
        "rule": rule.to_json(),
    }
    return _sweep("hankel", ratio, family, rule, cap, params, flags, notes)


def probe_berezin_bounded(
    g: SymbolSpec,
    family: TestFamily,
    alpha,
    p: float,
    w: WeightSpec,
    rule: PolydiskRule | None = None,
    cap: float | None = None,
) -> ProbeReport:
    """``max ||B_g f||_{L^p(omega)} / ||f||_{A^p(omega)}`` using the series form of the image."""
    alpha = alpha if isinstance(alpha, KernelOrder) else KernelOrder(alpha)
    if not p > 1:
        raise ValueError("p must exceed 1")
    rule = rule or default_probe_rule(w.dim)
    sup_g = g.sup_norm()
    cap = 10.0 * sup_g if cap is None else cap
    flags = _threshold_flags(alpha, p, w)
    notes = ["image evaluated from its kernel-series expansion"]

    def ratio(f, r):
        den = norm_ap(f, w, p, r)
        return _safe_ratio(norm_lp_grid(berezin_image(f, g, alpha), w, p, r), den)

    params = {
        "g": g.to_json(),
        "family": family.to_json(),
        "alpha": list(alpha.alpha),
        "p": p,
        "weight": w.to_json(),
        "rule": rule.to_json(),
    }
    return _sweep("berezin", ratio, family, rule, cap, params, {"sup_g": sup_g, **flags}, notes)
