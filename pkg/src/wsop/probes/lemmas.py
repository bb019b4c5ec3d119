"""Probes for the radial identity and the two auxiliary estimates."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_legendre

from ..operators import InnerFunctionSpec, inner_derivative
from ..pseries import CoefficientSeries, D, partial_derivative
from ..quad import DiskRule, PolydiskRule, weighted_rule
from ..weights import CoordWeight, WeightSpec, weight_indices
from .report import FAIL, INCONCLUSIVE, PASS, ProbeReport, refinement_verdict, rel_change

__all__ = [
    "sample_grid",
    "radial_integral",
    "scalar_radial_integral",
    "probe_radial_identity",
    "probe_lemma1",
    "lemma2_lhs",
    "probe_lemma2",
]


def sample_grid(n: int, per_coord: int = 5, rmax: float = 0.9) -> np.ndarray:
    """``per_coord**n`` points; coordinate values spiral out to radius ``rmax``."""
    t = np.arange(per_coord)
    vals = rmax * (t / max(per_coord - 1, 1)) * np.exp(1j * (0.3 + 2 * np.pi * t / per_coord))
    grids = np.meshgrid(*([vals] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _gauss01(order: int):
    x, w = roots_legendre(order)
    return 0.5 * (x + 1.0), 0.5 * w


def radial_integral(f: CoefficientSeries, points: np.ndarray, order: int = 32) -> np.ndarray:
    """``int_[0,1]^n Df(r_1 z_1, ..., r_n z_n) dr`` by tensor Gauss-Legendre."""
    Df = D(f)
    n = f.dim
    r, w = _gauss01(order)
    rs = np.meshgrid(*([r] * n), indexing="ij")
    ws = np.prod(np.meshgrid(*([w] * n), indexing="ij"), axis=0).ravel()
    rs = [x.ravel() for x in rs]
    args = [points[:, j, None] * rs[j][None, :] for j in range(n)]
    return Df(*args) @ ws


def scalar_radial_integral(f: CoefficientSeries, points: np.ndarray, order: int = 32) -> np.ndarray:
    """The single-variable version ``int_0^1 Df(r z) dr``; differs from f when n >= 2."""
    Df = D(f)
    r, w = _gauss01(order)
    args = [points[:, j, None] * r[None, :] for j in range(f.dim)]
    return Df(*args) @ w


def probe_radial_identity(
    f: CoefficientSeries, order: int = 32, per_coord: int = 5, rmax: float = 0.9
) -> ProbeReport:
    pts = sample_grid(f.dim, per_coord, rmax)
    exact = f(*pts.T)
    resid = np.abs(radial_integral(f, pts, order) - exact)
    resid2 = np.abs(radial_integral(f, pts, 2 * order) - exact)
    scalar = np.abs(scalar_radial_integral(f, pts, order) - exact)
    worst, worst2 = float(resid.max()), float(resid2.max())
    notes: list[str] = []
    verdict = PASS if worst <= 1e-10 else FAIL
    movement = rel_change(worst, worst2, floor=1e-12)
    verdict = refinement_verdict(verdict, movement, notes)
    if f.dim >= 2:
        notes.append("scalar-r variant reported for comparison; it is not an identity for n >= 2")
    samples = [(f"z{i}", v) for i, v in enumerate(resid)]
    summary = {
        "max_residual": worst,
        "max_residual_refined": worst2,
        "scalar_max_residual": float(scalar.max()),
        "refinement_delta": movement,
        "tolerance": 1e-10,
    }
    params = {"f": f.to_json(), "order": order, "grid_per_coord": per_coord, "grid_rmax": rmax}
    return ProbeReport("radial-identity", params, samples, summary, verdict, notes)


def _polar_grid(n_radial: int, n_angular: int, rmax: float) -> np.ndarray:
    rho = np.linspace(0.0, rmax, n_radial)
    th = 2 * np.pi * np.arange(n_angular) / n_angular
    return (rho[:, None] * np.exp(1j * th)[None, :]).ravel()


def _lemma1_sup(f, k, rmax, n_radial, n_angular) -> float:
    pts = _polar_grid(n_radial, n_angular, rmax)
    if isinstance(f, InnerFunctionSpec):
        # |d^k J| prod (1-|z_j|)^k_j factorises over coordinates
        total = 1.0
        for j, kj in enumerate(k):
            single = InnerFunctionSpec((f.coords[j],))
            vals = np.abs(inner_derivative(single, [kj], [pts])) * (1 - np.abs(pts)) ** kj
            total *= float(vals.max())
        return total
    dk = partial_derivative(f, k)
    n = f.dim
    mesh = [pts.reshape([-1 if i == j else 1 for i in range(n)]) for j in range(n)]
    vals = np.abs(dk(*mesh))
    for j, kj in enumerate(k):
        vals = vals * (1 - np.abs(mesh[j])) ** kj
    return float(vals.max())


def probe_lemma1(
    f: InnerFunctionSpec | CoefficientSeries,
    k,
    radii: tuple[float, float] = (0.9, 0.99),
    n_radial: int = 60,
    n_angular: int = 64,
) -> ProbeReport:
    """sup of ``|d^k f| prod (1-|z_j|)^k_j`` on grids reaching ``radii[0]`` and ``radii[1]``."""
    if not isinstance(f, (InnerFunctionSpec, CoefficientSeries)):
        raise TypeError("lemma1 accepts only bounded inputs: polynomials or Blaschke products")
    k = [int(x) for x in np.atleast_1d(k)]
    if len(k) != f.dim or min(k) < 0:
        raise ValueError("k must be a non-negative multi-index of the function's dimension")
    if isinstance(f, CoefficientSeries) and f.dim > 2:
        n_radial, n_angular = min(n_radial, 12), min(n_angular, 16)
    inner = _lemma1_sup(f, k, radii[0], n_radial, n_angular)
    outer = _lemma1_sup(f, k, radii[1], n_radial, n_angular)
    outer_fine = _lemma1_sup(f, k, radii[1], 2 * n_radial, 2 * n_angular)
    change = rel_change(outer, inner, floor=1e-14)
    notes: list[str] = []
    if not math.isfinite(outer):
        verdict = FAIL
    else:
        verdict = PASS if change < 0.10 else FAIL
    verdict = refinement_verdict(verdict, rel_change(outer_fine, outer, floor=1e-14), notes)
    samples = [(f"sup_r{radii[0]:g}", inner), (f"sup_r{radii[1]:g}", outer)]
    summary = {
        "sup_inner": inner,
        "sup_outer": outer,
        "sup_outer_refined": outer_fine,
        "relative_change": change,
    }
    fjson = f.to_json() if isinstance(f, CoefficientSeries) else {"inner": f.to_json()}
    params = {"f": fjson, "k": k, "radii": list(radii), "n_radial": n_radial, "n_angular": n_angular}
    return ProbeReport("lemma1", params, samples, summary, verdict, notes)


def lemma2_lhs(a: float, b: float, w: CoordWeight, x: np.ndarray, radial: int, angular: int):
    """``int (1-|u|^2)^a omega(1-|u|^2) |1 - x conj(u)|^-b dm(u)`` for real ``x``."""
    rule = PolydiskRule((DiskRule(radial, angular),))
    nodes, weights = weighted_rule(rule, WeightSpec((w,)), extra_exponent=a, form="squared")
    u, wt = nodes[0], weights[0]
    x = np.asarray(x, dtype=float)
    kern = np.abs(1.0 - x[:, None] * np.conj(u)[None, :]) ** (-b)
    return kern @ wt


def probe_lemma2(
    a: float,
    b: float,
    w: CoordWeight,
    z_radii=None,
    radial: int = 64,
    angular: int = 4096,
) -> ProbeReport:
    """Ratio of the weighted kernel integral to ``omega(1-|z|^2)/(1-|z|^2)^(b-a-2)``.

    The left side depends on ``|z|`` only, so the sweep runs along ``[0, 0.99]``.
    """
    x = np.linspace(0.0, 0.99, 34) if z_radii is None else np.asarray(z_radii, dtype=float)
    if np.any(x < 0) or np.any(x >= 1):
        raise ValueError("z radii must lie in [0, 1)")
    idx = weight_indices(w)
    aw, bw = idx.alpha_omega[0], idx.beta_omega[0]
    hyp = {
        "a+1-beta_omega>0": bool(a + 1 - bw > 0),
        "b>1": bool(b > 1),
        "b-a-2>alpha_omega": bool(b - a - 2 > aw),
    }
    holds = all(hyp.values())
    notes: list[str] = ["weight enters as omega(1-|u|^2) (squared form)"]
    if a + aw <= -1:
        notes.append("(1-|u|^2)^a omega(1-|u|^2) is not integrable: left side is infinite")
        summary = {"sup_ratio": math.inf, "hypotheses": hyp}
        params = {"a": a, "b": b, "weight": w.to_json(), "radial": radial, "angular": angular}
        return ProbeReport("lemma2", params, [], summary, FAIL if holds else INCONCLUSIVE, notes)

    def ratios(R, M):
        lhs = lemma2_lhs(a, b, w, x, R, M)
        t = 1.0 - x * x
        rhs = w(t) / t ** (b - a - 2)
        return lhs / rhs

    r1 = ratios(radial, angular)
    r2 = ratios(2 * radial, 2 * angular)
    sup1, sup2 = float(np.max(r1)), float(np.max(r2))
    movement = rel_change(sup1, sup2)
    i09 = int(np.argmin(np.abs(x - 0.9)))
    trend = float(r1[-1] / r1[i09]) if r1[i09] != 0 else math.inf
    if holds:
        verdict = PASS if math.isfinite(sup1) and movement < 0.10 else FAIL
        verdict = refinement_verdict(verdict, movement, notes)
    else:
        verdict = INCONCLUSIVE
        notes.append(
            f"hypotheses violated; ratio(|z|={x[-1]:g}) / ratio(|z|={x[i09]:g}) = {trend:.4g}"
        )
    samples = [(f"r{xi:.4f}", v) for xi, v in zip(x, r1)]
    summary = {
        "sup_ratio": sup1,
        "sup_ratio_refined": sup2,
        "refinement_delta": movement,
        "tail_trend": trend,
        "hypotheses": hyp,
        "hypotheses_hold": holds,
    }
    params = {
        "a": a,
        "b": b,
        "weight": w.to_json(),
        "z_radii": x,
        "radial": radial,
        "angular": angular,
    }
    return ProbeReport("lemma2", params, samples, summary, verdict, notes)
