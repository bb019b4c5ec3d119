"""Truncated multivariate power series on the polydisk.

A :class:`CoefficientSeries` stores the dense coefficient tensor ``a[k]`` of
``f(z) = sum_k a[k] z**k`` for ``0 <= k_j <= N_j``.  Calling a series evaluates
it with numpy broadcasting, so open-mesh arguments (``np.ix_`` style) cost
one Horner sweep per coordinate over the mesh rather than one per point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "CoefficientSeries",
    "FracOrder",
    "TruncationError",
    "evaluate",
    "frac_multiplier",
    "frac_derivative",
    "frac_antiderivative",
    "D",
    "kernel_series",
    "binomial_series_coeffs",
    "scale_radial",
    "partial_derivative",
    "random_polynomial",
]


class TruncationError(ValueError):
    """A requested truncation tolerance cannot be met within the degree cap."""


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    coeffs: np.ndarray
    tail_bound: float = 0.0  # sup over the closed polydisk of |f - truncation|

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim < 1:
            raise ValueError("coefficient tensor needs at least one axis")
        if 0 in c.shape:
            raise ValueError("empty coefficient tensor")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction ---------------------------------------------------------

    @classmethod
    def zeros(cls, degrees: Sequence[int]) -> "CoefficientSeries":
        return cls(np.zeros(tuple(d + 1 for d in degrees), dtype=complex))

    @classmethod
    def constant(cls, c: complex, n: int = 1) -> "CoefficientSeries":
        return cls(np.full((1,) * n, c, dtype=complex))

    @classmethod
    def monomial(cls, k: Sequence[int], c: complex = 1.0) -> "CoefficientSeries":
        k = [int(x) for x in k]
        if any(x < 0 for x in k):
            raise ValueError("multi-index entries must be non-negative")
        a = np.zeros(tuple(x + 1 for x in k), dtype=complex)
        a[tuple(k)] = c
        return cls(a)

    # shape ----------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.coeffs.shape)

    def padded(self, degrees: Sequence[int]) -> "CoefficientSeries":
        degrees = tuple(degrees)
        if len(degrees) != self.dim or any(d < e for d, e in zip(degrees, self.degrees)):
            raise ValueError(f"cannot pad degrees {self.degrees} to {degrees}")
        out = np.zeros(tuple(d + 1 for d in degrees), dtype=complex)
        out[tuple(slice(0, s) for s in self.coeffs.shape)] = self.coeffs
        return CoefficientSeries(out, self.tail_bound)

    def trimmed(self) -> "CoefficientSeries":
        """Drop trailing all-zero hyperplanes (keeps at least degree 0)."""
        c = self.coeffs
        slices = []
        for ax in range(c.ndim):
            other = tuple(i for i in range(c.ndim) if i != ax)
            nz = np.flatnonzero(np.any(c != 0, axis=other)) if other else np.flatnonzero(c != 0)
            slices.append(slice(0, int(nz[-1]) + 1 if nz.size else 1))
        return CoefficientSeries(c[tuple(slices)], self.tail_bound)

    # evaluation -----------------------------------------------------------

    def __call__(self, *z):
        """Evaluate with broadcasting; no domain check (polynomials are entire)."""
        if len(z) != self.dim:
            raise ValueError(f"series has dimension {self.dim}, got {len(z)} arguments")
        zs = [np.asarray(x, dtype=complex) for x in z]
        nd = max(x.ndim for x in zs)
        # coefficient axes live at the end so point axes broadcast on the left
        res = np.moveaxis(self.coeffs, tuple(range(self.dim)), tuple(range(-self.dim, 0)))
        for j in reversed(range(self.dim)):
            zj = zs[j].reshape(zs[j].shape + (1,) * j)
            zj = zj.reshape((1,) * (nd - zs[j].ndim) + zj.shape)
            acc = res[..., -1]
            for m in range(res.shape[-1] - 2, -1, -1):
                acc = acc * zj + res[..., m]
            res = acc
        shape = np.broadcast_shapes(*(x.shape for x in zs))
        if res.shape != shape:
            # constant directions never touch their argument
            res = np.broadcast_to(res, shape).copy()
        return res

    # arithmetic -----------------------------------------------------------

    def _aligned(self, other: "CoefficientSeries"):
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        deg = tuple(max(a, b) for a, b in zip(self.degrees, other.degrees))
        return self.padded(deg).coeffs, other.padded(deg).coeffs

    def __add__(self, other):
        if isinstance(other, CoefficientSeries):
            a, b = self._aligned(other)
            return CoefficientSeries(a + b, self.tail_bound + other.tail_bound)
        c = np.array(self.coeffs)
        c[(0,) * self.dim] += other
        return CoefficientSeries(c, self.tail_bound)

    __radd__ = __add__

    def __neg__(self):
        return CoefficientSeries(-self.coeffs, self.tail_bound)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, CoefficientSeries):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            from scipy.signal import convolve

            prod = convolve(self.coeffs, other.coeffs, method="direct")
            return CoefficientSeries(prod)
        other = complex(other)
        return CoefficientSeries(self.coeffs * other, self.tail_bound * abs(other))

    __rmul__ = __mul__

    def __repr__(self):
        return f"CoefficientSeries(dim={self.dim}, degrees={self.degrees})"

    def to_json(self) -> dict:
        flat = [[float(v.real), float(v.imag)] for v in self.coeffs.ravel()]
        return {"type": "poly", "n": self.dim, "shape": list(self.coeffs.shape), "coeffs": flat}

    @classmethod
    def from_json(cls, data: dict) -> "CoefficientSeries":
        """Accepts ``monomial``, ``poly`` and ``kernel`` function specs."""
        kind = data.get("type")
        if kind == "monomial":
            c = data.get("c", [1.0, 0.0])
            return cls.monomial(data["k"], _complex(c))
        if kind == "poly":
            vals = np.array([_complex(v) for v in data["coeffs"]], dtype=complex)
            n = int(data.get("n", 1))
            shape = data.get("shape")
            if shape is None:
                if n != 1:
                    raise ValueError("poly specs with n > 1 need a 'shape'")
                shape = [vals.size]
            return cls(vals.reshape(shape))
        if kind == "kernel":
            r, k = data["r"], data["k"]
            deg = data.get("deg")
            return kernel_series(r, k, degrees=deg, tol=data.get("tol", None if deg else 1e-12))
        raise ValueError(f"unknown function type {kind!r}")


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex numbers are [re, im] pairs, got {v}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


@dataclass(frozen=True)
class FracOrder:
    beta: tuple[float, ...] = field(default=(1.0,))

    def __post_init__(self):
        b = tuple(float(x) for x in np.atleast_1d(self.beta))
        if not b:
            raise ValueError("empty fractional order")
        if any(not x > -1 for x in b):
            raise ValueError(f"fractional order entries must be > -1, got {b}")
        object.__setattr__(self, "beta", b)

    @classmethod
    def ones(cls, n: int) -> "FracOrder":
        return cls((1.0,) * n)


def evaluate(f: CoefficientSeries, z: Sequence[complex]) -> complex:
    """Evaluate at one point of the open polydisk."""
    z = np.asarray(z, dtype=complex).ravel()
    if z.size != f.dim:
        raise ValueError(f"series has dimension {f.dim}, point has {z.size} coordinates")
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("evaluation point must lie in the open polydisk")
    return complex(f(*z))


def frac_multiplier(beta: FracOrder, degrees: Sequence[int]) -> np.ndarray:
    """Tensor of ``prod_j Gamma(b_j+1+k_j) / (Gamma(b_j+1) Gamma(k_j+1))``."""
    if len(beta.beta) != len(degrees):
        raise ValueError("order and series dimensions differ")
    out = np.ones(tuple(d + 1 for d in degrees))
    for j, (b, d) in enumerate(zip(beta.beta, degrees)):
        k = np.arange(d + 1, dtype=float)
        m = np.exp(gammaln(b + 1.0 + k) - gammaln(b + 1.0) - gammaln(k + 1.0))
        shape = [1] * len(degrees)
        shape[j] = d + 1
        out = out * m.reshape(shape)
    return out


def frac_derivative(f: CoefficientSeries, beta: FracOrder) -> CoefficientSeries:
    return CoefficientSeries(f.coeffs * frac_multiplier(beta, f.degrees))


def frac_antiderivative(f: CoefficientSeries, beta: FracOrder) -> CoefficientSeries:
    return CoefficientSeries(f.coeffs / frac_multiplier(beta, f.degrees))


def D(f: CoefficientSeries) -> CoefficientSeries:
    """Order-one fractional derivative in every coordinate: ``a_k -> prod(k_j+1) a_k``."""
    return frac_derivative(f, FracOrder.ones(f.dim))


def binomial_series_coeffs(k: float, r: float, degree: int) -> np.ndarray:
    """Coefficients ``Gamma(k+m) / (Gamma(k) m!) r**m`` of ``(1 - r z)**-k``."""
    m = np.arange(degree + 1, dtype=float)
    with np.errstate(divide="ignore"):
        logr = math.log(r) if r > 0 else -np.inf
    out = np.exp(gammaln(k + m) - gammaln(k) - gammaln(m + 1.0) + m * logr)
    if r == 0:
        out[0] = 1.0
    return out


def _binomial_tail(k: float, r: float, degree: int) -> float:
    """Upper bound for ``sum_{m > degree} c_m`` with ``c_m`` as above (|z| <= 1)."""
    if r == 0:
        return 0.0
    N = degree
    c_next = float(binomial_series_coeffs(k, r, N + 1)[-1])
    # the term ratio r (k+m)/(m+1) is monotone in m with limit r
    q = r * (k + N + 1) / (N + 2) if k >= 1 else r
    if q >= 1:
        return math.inf
    return c_next / (1.0 - q)


def kernel_series(
    r: Sequence[float],
    k: Sequence[float],
    degrees: Sequence[int] | None = None,
    tol: float | None = 1e-12,
    max_degree: int = 4096,
) -> CoefficientSeries:
    """Truncated coefficients of ``prod_j (1 - r_j z_j)**(-k_j)``.

    With ``degrees=None`` the smallest degrees meeting ``tol`` are chosen.  The
    returned ``tail_bound`` bounds the dropped tail on the closed polydisk;
    :class:`TruncationError` is raised when ``tol`` cannot be met.
    """
    r = [float(x) for x in np.atleast_1d(r)]
    k = [float(x) for x in np.atleast_1d(k)]
    if len(r) != len(k):
        raise ValueError("r and k must have the same length")
    if any(not 0.0 <= x < 1.0 for x in r):
        raise ValueError("kernel radii must lie in [0, 1)")
    if any(x <= 0 for x in k):
        raise ValueError("kernel exponents must be positive")
    n = len(r)
    if degrees is None:
        if tol is None:
            raise ValueError("either degrees or tol is required")
        # the tail of a product is at most sum_j T_j prod_{i != j} S_i with S_i = (1-r_i)**-k_i
        sums = [(1.0 - rj) ** -kj for rj, kj in zip(r, k)]
        total = math.prod(sums)
        degrees = [
            _degree_for_tail(kj, rj, tol * sj / (n * total), max_degree)
            for rj, kj, sj in zip(r, k, sums)
        ]
    degrees = [int(d) for d in np.broadcast_to(np.atleast_1d(degrees), (n,))]
    vecs = [binomial_series_coeffs(kj, rj, d) for rj, kj, d in zip(r, k, degrees)]
    coeffs = vecs[0]
    for v in vecs[1:]:
        coeffs = np.multiply.outer(coeffs, v)
    full = [float(np.sum(v)) + _binomial_tail(kj, rj, d) for v, rj, kj, d in zip(vecs, r, k, degrees)]
    kept = [float(np.sum(v)) for v in vecs]
    tail = math.prod(full) - math.prod(kept)
    if tol is not None and not tail <= tol:
        raise TruncationError(
            f"kernel truncation at degrees {degrees} leaves tail {tail:.3g} > tol {tol:.3g}"
        )
    return CoefficientSeries(coeffs, max(tail, 0.0))


def _degree_for_tail(k: float, r: float, tol: float, max_degree: int) -> int:
    N = 0
    while _binomial_tail(k, r, N) > tol:
        if N >= max_degree:
            raise TruncationError(
                f"radius {r} needs degree > {max_degree} to reach tail tolerance {tol:.3g}"
            )
        N = min(max_degree, max(2 * N, 8))
    lo, hi = N // 2, N
    while lo < hi:
        mid = (lo + hi) // 2
        if _binomial_tail(k, r, mid) > tol:
            lo = mid + 1
        else:
            hi = mid
    return hi


def scale_radial(f: CoefficientSeries, r: Sequence[float]) -> CoefficientSeries:
    """Coefficients of ``f(r_1 z_1, ..., r_n z_n)``."""
    r = np.broadcast_to(np.asarray(r, dtype=float), (f.dim,))
    if np.any((r < 0) | (r > 1)):
        raise ValueError("radial scale factors must lie in [0, 1]")
    c = f.coeffs
    for j, (rj, d) in enumerate(zip(r, f.degrees)):
        p = rj ** np.arange(d + 1, dtype=float)  # 0**0 == 1 keeps a_0
        shape = [1] * f.dim
        shape[j] = d + 1
        c = c * p.reshape(shape)
    return CoefficientSeries(c)


def partial_derivative(f: CoefficientSeries, k: Sequence[int]) -> CoefficientSeries:
    """Ordinary partial derivative ``d^{|k|} f / dz_1^{k_1} ... dz_n^{k_n}``."""
    k = [int(x) for x in k]
    if len(k) != f.dim or any(x < 0 for x in k):
        raise ValueError("invalid derivative multi-index")
    c = f.coeffs
    for j, (kj, d) in enumerate(zip(k, f.degrees)):
        if kj == 0:
            continue
        if kj > d:
            return CoefficientSeries.zeros([0] * f.dim)
        m = np.arange(kj, d + 1, dtype=float)
        falling = np.exp(gammaln(m + 1.0) - gammaln(m - kj + 1.0))
        shape = [1] * f.dim
        shape[j] = d + 1 - kj
        c = np.take(c, np.arange(kj, d + 1), axis=j) * falling.reshape(shape)
    return CoefficientSeries(c)


def random_polynomial(
    n: int, degree: int | Sequence[int], rng: np.random.Generator
) -> CoefficientSeries:
    """Dense polynomial with iid standard complex normal coefficients."""
    deg = np.broadcast_to(np.atleast_1d(degree), (n,))
    shape = tuple(int(d) + 1 for d in deg)
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    return CoefficientSeries(c)
