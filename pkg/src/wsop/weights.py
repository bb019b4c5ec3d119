"""Admissible weights on (0, 1) and their growth indices.

Two weight kinds are supported, per polydisk coordinate:

* ``power``    -- ``omega(t) = t**alpha`` with ``alpha > -1``;
* ``powerlog`` -- ``omega(t) = t**alpha * log(e / t)**s``.

A :class:`WeightSpec` is the product weight
``omega(1 - |z|) = prod_j omega_j(1 - |z_j|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "CoordWeight",
    "WeightSpec",
    "WeightIndices",
    "SClassCertificate",
    "SandwichReport",
    "eval_weight",
    "eval_product_weight",
    "weight_indices",
    "certify_s_class",
    "sandwich_check",
    "geometric_grid",
]

_KINDS = ("power", "powerlog")


@dataclass(frozen=True)
class CoordWeight:
    """One coordinate factor ``omega_j``."""

    kind: str = "power"
    exponent: float = 0.0
    log_exponent: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in _KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}; expected one of {_KINDS}")
        object.__setattr__(self, "kind", kind)
        if not math.isfinite(self.exponent) or self.exponent <= -1:
            raise ValueError(f"weight exponent must be finite and > -1, got {self.exponent}")
        if kind == "power" and self.log_exponent != 0.0:
            raise ValueError("log_exponent is only meaningful for powerlog weights")
        if not math.isfinite(self.log_exponent):
            raise ValueError("log_exponent must be finite")

    @classmethod
    def power(cls, alpha: float) -> "CoordWeight":
        return cls("power", float(alpha))

    @classmethod
    def powerlog(cls, alpha: float, s: float) -> "CoordWeight":
        return cls("powerlog", float(alpha), float(s))

    def __call__(self, t):
        """Vectorised evaluation without domain checks (quadrature nodes)."""
        t = np.asarray(t, dtype=float)
        out = t**self.exponent
        if self.kind == "powerlog" and self.log_exponent != 0.0:
            out = out * (1.0 - np.log(t)) ** self.log_exponent
        return out

    def regular_part(self, t):
        """``omega(t) / t**exponent``: the factor left after a Jacobi rule
        has absorbed the algebraic boundary behaviour."""
        t = np.asarray(t, dtype=float)
        if self.kind == "powerlog" and self.log_exponent != 0.0:
            return (1.0 - np.log(t)) ** self.log_exponent
        return np.ones_like(t)

    def to_json(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "alpha": self.exponent}
        return {"kind": "powerlog", "alpha": self.exponent, "s": self.log_exponent}

    @classmethod
    def from_json(cls, data: dict) -> "CoordWeight":
        kind = str(data.get("kind", "power")).lower()
        alpha = float(data.get("alpha", 0.0))
        if kind == "power":
            return cls.power(alpha)
        return cls(kind, alpha, float(data.get("s", 0.0)))


@dataclass(frozen=True)
class WeightSpec:
    """Product weight on the polydisk; one :class:`CoordWeight` per coordinate."""

    coords: tuple[CoordWeight, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        if len(coords) < 1:
            raise ValueError("a weight needs at least one coordinate")
        for c in coords:
            if not isinstance(c, CoordWeight):
                raise TypeError(f"expected CoordWeight, got {type(c).__name__}")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def power(cls, alphas: float | Sequence[float], n: int | None = None) -> "WeightSpec":
        if np.ndim(alphas) == 0:
            alphas = [float(alphas)] * (n or 1)
        return cls(tuple(CoordWeight.power(a) for a in alphas))

    @classmethod
    def unweighted(cls, n: int = 1) -> "WeightSpec":
        return cls.power(0.0, n)

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple(c.exponent for c in self.coords)

    def to_json(self) -> dict:
        return {"coords": [c.to_json() for c in self.coords]}

    @classmethod
    def from_json(cls, data: dict | list) -> "WeightSpec":
        if isinstance(data, dict) and "coords" in data:
            items = data["coords"]
        elif isinstance(data, dict):
            items = [data]
        else:
            items = data
        return cls(tuple(CoordWeight.from_json(d) for d in items))


@dataclass(frozen=True)
class WeightIndices:
    """Growth exponents of each coordinate weight near ``t = 0``.

    ``alpha_omega = lim log(omega(t)) / log(t)`` and ``beta_omega = -alpha_omega``.
    ``slack[j]`` is True when the bounds ``t**alpha <= omega <= t**(-beta)`` only
    hold after an arbitrarily small loosening of the exponents (log factors).
    """

    alpha_omega: tuple[float, ...]
    beta_omega: tuple[float, ...]
    slack: tuple[bool, ...]


@dataclass(frozen=True)
class SClassCertificate:
    q: float
    m_hat: float
    M_hat: float
    grid_size: int
    passed: bool

    @property
    def literal_alpha(self) -> float:
        """``log m / log(1/q)`` evaluated with the scanned constants."""
        return math.log(self.m_hat) / math.log(1.0 / self.q)

    @property
    def literal_beta(self) -> float:
        return math.log(self.M_hat) / math.log(1.0 / self.q)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "m_hat": self.m_hat,
            "M_hat": self.M_hat,
            "grid_size": self.grid_size,
            "passed": self.passed,
            "literal_alpha": self.literal_alpha,
            "literal_beta": self.literal_beta,
        }


@dataclass(frozen=True)
class SandwichReport:
    passed: bool
    worst_t: float
    max_violation: float  # in log units; 0 when every grid point satisfies both bounds
    lower_ok: bool
    upper_ok: bool


def geometric_grid(size: int, decades: float = 60.0) -> np.ndarray:
    """``size`` points ``2**-x`` with ``x`` uniform in ``(0, decades]``.

    Dense near ``t = 1`` in absolute terms and geometric towards ``t = 0``.
    """
    x = np.linspace(0.0, decades, size + 1)[1:]
    return np.exp2(-x)


def eval_weight(w: CoordWeight, t: float) -> float:
    t = float(t)
    if not 0.0 < t < 1.0:
        raise ValueError(f"weight argument must lie in (0, 1), got {t}")
    return float(w(t))


def eval_product_weight(w: WeightSpec, t: Sequence[float]) -> float:
    t = list(t)
    if len(t) != w.dim:
        raise ValueError(f"expected {w.dim} arguments, got {len(t)}")
    out = 1.0
    for c, tj in zip(w.coords, t):
        out *= eval_weight(c, tj)
    return out


def weight_indices(w: WeightSpec | CoordWeight) -> WeightIndices:
    coords = (w,) if isinstance(w, CoordWeight) else w.coords
    alphas = tuple(float(c.exponent) for c in coords)
    betas = tuple(-a if a != 0.0 else 0.0 for a in alphas)
    slack = tuple(c.kind == "powerlog" and c.log_exponent != 0.0 for c in coords)
    return WeightIndices(alphas, betas, slack)


def certify_s_class(w: CoordWeight, q: float, grid_size: int = 64) -> SClassCertificate:
    """Scan ``omega(lam * r) / omega(r)`` over ``r`` (geometric) x ``lam`` in ``[q, 1]``."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    r = geometric_grid(grid_size)
    lam = np.linspace(q, 1.0, grid_size)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        # log-space keeps the ratio finite for r ~ 2**-60
        log_ratio = _log_weight(w, lam[:, None] * r[None, :]) - _log_weight(w, r)[None, :]
        ratio = np.exp(log_ratio)
    m_hat = float(np.min(ratio))
    M_hat = float(np.max(ratio))
    passed = bool(m_hat > 0.0 and math.isfinite(M_hat))
    return SClassCertificate(float(q), m_hat, M_hat, int(grid_size), passed)


def sandwich_check(
    w: CoordWeight, grid_size: int = 64, slack: float = 0.0
) -> SandwichReport:
    """Check ``t**(alpha + slack) <= omega(t) <= t**(-beta - slack)`` on the grid."""
    if slack < 0:
        raise ValueError("slack must be non-negative")
    idx = weight_indices(w)
    a, b = idx.alpha_omega[0], idx.beta_omega[0]
    t = geometric_grid(grid_size)
    logt = np.log(t)
    logw = _log_weight(w, t)
    # violations measured in log units; positive means the bound fails
    lower_gap = (a + slack) * logt - logw
    upper_gap = logw - (-b - slack) * logt
    tol = 64 * np.finfo(float).eps * np.maximum(1.0, np.abs(logw))
    viol = np.maximum(np.maximum(lower_gap, upper_gap), 0.0)
    viol = np.where(viol <= tol, 0.0, viol)
    i = int(np.argmax(viol))
    lower_ok = bool(np.all(lower_gap <= tol))
    upper_ok = bool(np.all(upper_gap <= tol))
    return SandwichReport(lower_ok and upper_ok, float(t[i]), float(viol[i]), lower_ok, upper_ok)


def _log_weight(w: CoordWeight, t):
    t = np.asarray(t, dtype=float)
    out = w.exponent * np.log(t)
    if w.kind == "powerlog" and w.log_exponent != 0.0:
        out = out + w.log_exponent * np.log1p(-np.log(t))
    return out
