"""Toeplitz, little Hankel and Berezin-type operators on the polydisk.

Conventions
-----------
* ``hankel_little`` is the unnormalised integral
  ``int (1-|zeta|^2)^alpha / (1 - zeta conj(z))^(alpha+2) f g dm``.
* ``bergman_projection`` and ``berezin`` carry the factor ``(alpha+1)/pi`` per
  coordinate, so both reproduce constants.
* Symbols are finite sums ``c zeta^a conj(zeta)^b`` (:class:`SymbolSpec`) or
  plain callables.

For polynomial ``f`` and polynomial symbols every kernel integral splits into
one-dimensional moments, so ``n = 2, 3`` cost little more than ``n = 1``.
Closed forms for the same integrals (``hankel_image``, ``berezin_image``) use
the kernel expansions ``(1 - x)^-(alpha+2) = sum d_m x^m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import betaln, gammaln

from .pseries import CoefficientSeries
from .quad import PolydiskRule, TorusRule

__all__ = [
    "SymbolTerm",
    "SymbolSpec",
    "KernelOrder",
    "InnerFunctionSpec",
    "BoundaryGuardError",
    "inner_eval",
    "inner_taylor",
    "inner_derivative",
    "toeplitz_conj_coeff",
    "toeplitz_quad",
    "toeplitz_quad_many",
    "hankel_little",
    "bergman_projection",
    "berezin",
    "hankel_image",
    "berezin_image",
    "operator_rule",
    "product_tensor",
    "kernel_coeffs",
]

GUARD = 0.95
OPERATOR_ANGULAR = 512
_MAX_MESH = 1 << 22


class BoundaryGuardError(ValueError):
    pass


@dataclass(frozen=True)
class SymbolTerm:
    c: complex
    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        a, b = tuple(int(x) for x in self.a), tuple(int(x) for x in self.b)
        if len(a) != len(b) or not a:
            raise ValueError("a and b must be non-empty multi-indices of equal length")
        if min(a) < 0 or min(b) < 0:
            raise ValueError("multi-index entries must be non-negative")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", complex(self.c))


@dataclass(frozen=True)
class SymbolSpec:
    """Finite sum of terms ``c * zeta^a * conj(zeta)^b``."""

    terms: tuple[SymbolTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("a symbol needs at least one term")
        n = len(terms[0].a)
        if any(len(t.a) != n for t in terms):
            raise ValueError("all symbol terms must have the same dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return len(self.terms[0].a)

    @property
    def holomorphic(self) -> bool:
        return all(not any(t.b) for t in self.terms)

    @property
    def antiholomorphic(self) -> bool:
        return all(not any(t.a) for t in self.terms)

    @classmethod
    def constant(cls, c: complex = 1.0, n: int = 1) -> "SymbolSpec":
        return cls((SymbolTerm(c, (0,) * n, (0,) * n),))

    @classmethod
    def monomial(cls, a: Sequence[int], b: Sequence[int] | None = None, c: complex = 1.0):
        b = (0,) * len(a) if b is None else b
        return cls((SymbolTerm(c, tuple(a), tuple(b)),))

    @classmethod
    def from_series(cls, h: CoefficientSeries) -> "SymbolSpec":
        terms = [
            SymbolTerm(h.coeffs[k], k, (0,) * h.dim)
            for k in zip(*np.nonzero(h.coeffs))
        ]
        return cls(tuple(terms) or (SymbolTerm(0.0, (0,) * h.dim, (0,) * h.dim),))

    def conj(self) -> "SymbolSpec":
        return SymbolSpec(tuple(SymbolTerm(np.conj(t.c), t.b, t.a) for t in self.terms))

    def __call__(self, *z):
        if len(z) != self.dim:
            raise ValueError(f"symbol has dimension {self.dim}, got {len(z)} arguments")
        zs = [np.asarray(x, dtype=complex) for x in z]
        out = 0j
        for t in self.terms:
            v = t.c
            for zj, aj, bj in zip(zs, t.a, t.b):
                v = v * zj**aj * np.conj(zj) ** bj
            out = out + v
        return np.broadcast_to(out, np.broadcast_shapes(*(x.shape for x in zs))) if np.ndim(out) == 0 else out

    def degrees(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Per-coordinate maxima of ``a`` and of ``b``."""
        A = tuple(max(t.a[j] for t in self.terms) for j in range(self.dim))
        B = tuple(max(t.b[j] for t in self.terms) for j in range(self.dim))
        return A, B

    def holomorphic_series(self) -> CoefficientSeries:
        if not self.holomorphic:
            raise ValueError("symbol is not holomorphic")
        A, _ = self.degrees()
        c = np.zeros(tuple(d + 1 for d in A), dtype=complex)
        for t in self.terms:
            c[t.a] += t.c
        return CoefficientSeries(c)

    def sup_norm(self, samples: int = 64) -> float:
        """Grid estimate of ``sup |g|`` over the closed polydisk."""
        radii = np.linspace(0.0, 1.0, 9)
        theta = 2 * np.pi * np.arange(samples) / samples
        pts = (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()
        n = self.dim
        mesh = [pts.reshape([-1 if i == j else 1 for i in range(n)]) for j in range(n)]
        return float(np.max(np.abs(self(*mesh)))) if n <= 2 else float(
            sum(abs(t.c) for t in self.terms)
        )

    def to_json(self) -> dict:
        return {
            "terms": [
                {"c": [t.c.real, t.c.imag], "a": list(t.a), "b": list(t.b)} for t in self.terms
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "SymbolSpec":
        terms = []
        for t in data["terms"]:
            c = t.get("c", [1.0, 0.0])
            c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
            a = t.get("a")
            b = t.get("b", [0] * len(a))
            terms.append(SymbolTerm(c, tuple(a), tuple(b)))
        return cls(tuple(terms))


@dataclass(frozen=True)
class KernelOrder:
    alpha: tuple[float, ...]

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        if not alpha:
            raise ValueError("kernel order needs at least one entry")
        for a in alpha:
            if not a > -1:
                raise ValueError(f"kernel order entries must be > -1, got {a}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self) -> int:
        return len(self.alpha)

    def of_dim(self, n: int) -> tuple[float, ...]:
        if self.dim == n:
            return self.alpha
        if self.dim == 1:
            return self.alpha * n
        raise ValueError(f"kernel order has dimension {self.dim}, expected {n}")


def _as_order(alpha) -> KernelOrder:
    return alpha if isinstance(alpha, KernelOrder) else KernelOrder(alpha)


@dataclass(frozen=True)
class InnerFunctionSpec:
    """Coordinatewise finite Blaschke product times a unimodular constant."""

    coords: tuple[tuple[complex, ...], ...]
    constant: complex = 1.0

    def __post_init__(self):
        coords = tuple(tuple(complex(a) for a in zs) for zs in self.coords)
        if not coords:
            raise ValueError("inner function needs at least one coordinate")
        for zs in coords:
            for a in zs:
                if not abs(a) < 1:
                    raise ValueError(f"Blaschke zero {a} must lie in the open disk")
        if abs(abs(complex(self.constant)) - 1.0) > 1e-12:
            raise ValueError("the constant factor must be unimodular")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "constant", complex(self.constant))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(zs) for zs in self.coords)

    @classmethod
    def trivial(cls, n: int = 1) -> "InnerFunctionSpec":
        return cls(((),) * n)

    def factor(self, j: int, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for a in self.coords[j]:
            out = out * _blaschke_factor(a, z)
        return out

    def __call__(self, *z):
        if len(z) != self.dim:
            raise ValueError(f"inner function has dimension {self.dim}")
        out = self.constant
        for j, zj in enumerate(z):
            out = out * self.factor(j, zj)
        return out

    def to_json(self) -> dict:
        return {
            "coords": [{"zeros": [[a.real, a.imag] for a in zs]} for zs in self.coords],
            "constant": [self.constant.real, self.constant.imag],
        }

    @classmethod
    def from_json(cls, data: dict) -> "InnerFunctionSpec":
        coords = []
        for c in data["coords"]:
            coords.append(tuple(complex(z[0], z[1]) if isinstance(z, (list, tuple)) else complex(z)
                                for z in c.get("zeros", [])))
        k = data.get("constant", [1.0, 0.0])
        return cls(tuple(coords), complex(k[0], k[1]) if isinstance(k, (list, tuple)) else k)


def _blaschke_factor(a: complex, z):
    if a == 0:
        return z
    return (np.conj(a) / abs(a)) * (a - z) / (1.0 - np.conj(a) * z)


def inner_eval(J: InnerFunctionSpec, z: Sequence[complex]) -> complex:
    z = [complex(x) for x in z]
    if len(z) != J.dim:
        raise ValueError(f"expected {J.dim} coordinates, got {len(z)}")
    for zj in z:
        if abs(zj) > 1.0 + 1e-14:
            raise ValueError(f"point {zj} lies outside the closed disk")
    return complex(J(*z))


def _factor_taylor(a: complex, degree: int, z0: complex = 0.0) -> np.ndarray:
    """Taylor coefficients of one Blaschke factor about ``z0``."""
    m = np.arange(degree + 1)
    if a == 0:
        c = np.zeros(degree + 1, dtype=complex)
        c[0] = z0
        if degree >= 1:
            c[1] = 1.0
        return c
    ab = np.conj(a)
    u = 1.0 - ab * z0
    # b(z) = 1/ab + (a - 1/ab) / (1 - ab z); expand 1/(u - ab (z - z0))
    c = (a - 1.0 / ab) * ab**m / u ** (m + 1)
    c[0] += 1.0 / ab
    return c * (ab / abs(a))


def _coord_taylor(J: InnerFunctionSpec, j: int, degree: int, z0: complex = 0.0) -> np.ndarray:
    out = np.zeros(degree + 1, dtype=complex)
    out[0] = 1.0
    for a in J.coords[j]:
        out = np.convolve(out, _factor_taylor(a, degree, z0))[: degree + 1]
    return out


def inner_taylor(J: InnerFunctionSpec, degree: int | Sequence[int] = 64) -> CoefficientSeries:
    """Truncated Taylor series of ``J`` about the origin."""
    degs = [int(degree)] * J.dim if np.ndim(degree) == 0 else [int(d) for d in degree]
    c = np.asarray(J.constant, dtype=complex)
    for j, d in enumerate(degs):
        c = np.multiply.outer(c, _coord_taylor(J, j, d))
    tail = 0.0
    for zs, d in zip(J.coords, degs):
        if zs:
            rmax = max(abs(a) for a in zs)
            tail += len(zs) * 2.0 * rmax**d / max(1.0 - rmax, 1e-300)
    return CoefficientSeries(c, tail_bound=tail)


def inner_derivative(J: InnerFunctionSpec, k: Sequence[int], z: Sequence) -> np.ndarray:
    """``d^k J`` at points ``z`` (arrays per coordinate), via exact local Taylor expansion."""
    k = [int(x) for x in k]
    out = J.constant
    for j, (kj, zj) in enumerate(zip(k, z)):
        zj = np.asarray(zj, dtype=complex)
        flat = zj.ravel()
        vals = np.array([_coord_taylor(J, j, kj, z0)[kj] for z0 in flat]) * math.factorial(kj)
        out = out * vals.reshape(zj.shape)
    return out


def product_tensor(f: CoefficientSeries, g: SymbolSpec) -> np.ndarray:
    """Coefficients ``C[a, b]`` of ``f(zeta) g(zeta) = sum C zeta^a conj(zeta)^b``.

    Shape is ``(A_1, ..., A_n, B_1, ..., B_n)``.
    """
    if f.dim != g.dim:
        raise ValueError("function and symbol dimensions differ")
    GA, GB = g.degrees()
    A = tuple(d + ga + 1 for d, ga in zip(f.degrees, GA))
    B = tuple(gb + 1 for gb in GB)
    C = np.zeros(A + B, dtype=complex)
    for t in g.terms:
        sl = tuple(slice(a, a + d + 1) for a, d in zip(t.a, f.degrees)) + t.b
        C[sl] += t.c * f.coeffs
    return C


def kernel_coeffs(alpha: float, m) -> np.ndarray:
    """``d_m = Gamma(alpha+2+m) / (Gamma(alpha+2) m!)``: coefficients of (1-x)^-(alpha+2)."""
    m = np.asarray(m, dtype=float)
    return np.exp(gammaln(alpha + 2 + m) - gammaln(alpha + 2) - gammaln(m + 1))


def toeplitz_conj_coeff(f: CoefficientSeries, h: SymbolSpec | CoefficientSeries) -> CoefficientSeries:
    """Coefficients of ``T_{conj h} f``: ``c_k = sum_j conj(b_j) a_{k+j}``."""
    if isinstance(h, CoefficientSeries):
        h = SymbolSpec.from_series(h)
    if not h.holomorphic:
        raise ValueError("the coefficient oracle needs a holomorphic h (symbol conj(h))")
    if h.dim != f.dim:
        raise ValueError("function and symbol dimensions differ")
    out = np.zeros_like(f.coeffs)
    for t in h.terms:
        if any(a > d for a, d in zip(t.a, f.degrees)):
            continue
        src = tuple(slice(a, None) for a in t.a)
        dst = tuple(slice(0, d + 1 - a) for a, d in zip(t.a, f.degrees))
        out[dst] += np.conj(t.c) * f.coeffs[src]
    return CoefficientSeries(out)


def _combined_degree(f, h) -> int | None:
    if not isinstance(f, CoefficientSeries) or not isinstance(h, SymbolSpec):
        return None
    A, B = h.degrees()
    return max(d + a + b for d, a, b in zip(f.degrees, A, B))


def toeplitz_quad_many(
    f: CoefficientSeries | Callable,
    h: SymbolSpec | Callable,
    points: np.ndarray,
    rule: TorusRule | None = None,
    degree: int | None = None,
) -> np.ndarray:
    """Discrete Cauchy integral of ``f h`` over the torus at each row of ``points``.

    The trapezoid sum uses the Cauchy kernel band-limited to frequencies below
    ``M/2``; it reproduces the analytic projection exactly for Laurent
    polynomials of degree below ``M/2`` in every coordinate.
    """
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    n = points.shape[1]
    rule = rule or TorusRule((256,) * n)
    if rule.dim != n:
        raise ValueError(f"torus rule has dimension {rule.dim}, points have {n}")
    if np.any(np.abs(points) >= 1):
        raise ValueError("evaluation points must lie in the open polydisk")
    if degree is None:
        degree = _combined_degree(f, h)
    if degree is not None and min(rule.counts) < 2 * degree + 2:
        raise ValueError(
            f"torus rule too coarse: need M >= {2 * degree + 2} for combined degree {degree}"
        )
    xi = [rule.nodes(j) for j in range(n)]
    mesh = [x.reshape([-1 if i == j else 1 for i in range(n)]) for j, x in enumerate(xi)]
    vals = np.asarray(f(*mesh), dtype=complex) * np.asarray(h(*mesh), dtype=complex)
    vals = np.broadcast_to(vals, tuple(x.size for x in xi))
    kernels = []
    for j, M in enumerate(rule.counts):
        H = (M + 1) // 2
        q = points[:, j, None] * np.conj(xi[j])[None, :]
        kernels.append((1.0 - q**H) / (1.0 - q) / M)
    return _contract(vals, kernels)


def toeplitz_quad(f, h, z: Sequence[complex], rule: TorusRule | None = None, degree=None) -> complex:
    return complex(toeplitz_quad_many(f, h, np.asarray([z]), rule, degree)[0])


def _contract(vals: np.ndarray, kernels: list[np.ndarray]) -> np.ndarray:
    """``out[p] = sum_i vals[i_1..i_n] prod_j K_j[p, i_j]``."""
    n = len(kernels)
    letters = "abcdefgh"[:n]
    spec = letters + "," + ",".join(f"p{c}" for c in letters) + "->p"
    return np.einsum(spec, vals, *kernels, optimize=True)


def operator_rule(n: int = 1, radial: int = 64, angular: int = OPERATOR_ANGULAR) -> PolydiskRule:
    """Default rule for kernel operators (finer in angle than the norm rule)."""
    return PolydiskRule.uniform(n, radial, angular)


def _check_points(points, guard):
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    if guard is not None and np.any(np.abs(points) > guard):
        raise BoundaryGuardError(
            f"evaluation point outside the |z_j| <= {guard} guard; pass guard=None with a finer rule"
        )
    return points


def _kernel_operator(F, alpha, points, rule, kernel, guard):
    """Shared driver: ``int prod_j (1-|zeta_j|^2)^alpha_j K(zeta_j, z_j) F(zeta) dm``.

    ``F`` is either a coefficient tensor ``C[a, b]`` (polynomial data, handled by
    one-dimensional moments) or a callable on the node mesh.
    """
    points = _check_points(points, guard)
    n = points.shape[1]
    alphas = _as_order(alpha).of_dim(n)
    rule = rule or operator_rule(n)
    if rule.dim != n:
        raise ValueError(f"rule has dimension {rule.dim}, points have {n}")
    disks = [d.with_gamma(a) for d, a in zip(rule.disks, alphas)]
    kmats, znodes = [], []
    for j, (d, a) in enumerate(zip(disks, alphas)):
        zeta = d.nodes()
        w = d.weights() * (1.0 + d.radii()) ** a
        kmats.append(kernel(zeta[None, :], points[:, j, None], a) * w[None, :])
        znodes.append(zeta)
    if isinstance(F, np.ndarray):
        C = F
        moments = []
        for j in range(n):
            A, B = C.shape[j], C.shape[n + j]
            za = znodes[j][:, None] ** np.arange(A)[None, :]
            zb = np.conj(znodes[j])[:, None] ** np.arange(B)[None, :]
            basis = (za[:, :, None] * zb[:, None, :]).reshape(len(znodes[j]), A * B)
            moments.append((kmats[j] @ basis).reshape(-1, A, B))
        letters_a = "abcdef"[:n]
        letters_b = "ghijkl"[:n]
        spec = (
            letters_a + letters_b + ","
            + ",".join(f"p{a}{b}" for a, b in zip(letters_a, letters_b))
            + "->p"
        )
        return np.einsum(spec, C, *moments, optimize=True)
    size = math.prod(len(z) for z in znodes)
    if size > _MAX_MESH:
        raise ValueError(
            f"tensor mesh of {size} nodes is too large for a callable integrand; "
            "use polynomial data or a smaller rule"
        )
    mesh = [z.reshape([-1 if i == j else 1 for i in range(n)]) for j, z in enumerate(znodes)]
    vals = np.broadcast_to(np.asarray(F(*mesh), dtype=complex), tuple(len(z) for z in znodes))
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite integrand value on the node mesh")
    return _contract(vals, kmats)


def _integrand(f, g):
    """Polynomial data becomes a coefficient tensor; anything else a callable."""
    if isinstance(f, CoefficientSeries) and isinstance(g, SymbolSpec):
        return product_tensor(f, g)
    if isinstance(f, CoefficientSeries) and g is None:
        return product_tensor(f, SymbolSpec.constant(1.0, f.dim))
    if g is None:
        return f
    return lambda *z: np.asarray(f(*z), dtype=complex) * np.asarray(g(*z), dtype=complex)


def _hankel_kernel(zeta, z, a):
    return (1.0 - zeta * np.conj(z)) ** (-(a + 2.0))


def _projection_kernel(zeta, z, a):
    return (a + 1.0) / np.pi * (1.0 - z * np.conj(zeta)) ** (-(a + 2.0))


def _berezin_kernel(zeta, z, a):
    rz = np.abs(z) ** 2
    return (a + 1.0) / np.pi * (1.0 - rz) ** (a + 2.0) / np.abs(1.0 - z * np.conj(zeta)) ** (2 * a + 4.0)


def hankel_little(f, g, alpha, z, rule: PolydiskRule | None = None, guard: float | None = GUARD):
    """Quadrature value of the little Hankel integral at ``z`` (a point or rows of points)."""
    pts = np.atleast_2d(np.asarray(z, dtype=complex))
    out = _kernel_operator(_integrand(f, g), alpha, pts, rule, _hankel_kernel, guard)
    return complex(out[0]) if np.ndim(z) <= 1 else out


def bergman_projection(F, alpha, z, rule: PolydiskRule | None = None, guard: float | None = GUARD):
    pts = np.atleast_2d(np.asarray(z, dtype=complex))
    out = _kernel_operator(_integrand(F, None), alpha, pts, rule, _projection_kernel, guard)
    return complex(out[0]) if np.ndim(z) <= 1 else out


def berezin(f, g, alpha, z, rule: PolydiskRule | None = None, guard: float | None = GUARD):
    pts = np.atleast_2d(np.asarray(z, dtype=complex))
    out = _kernel_operator(_integrand(f, g), alpha, pts, rule, _berezin_kernel, guard)
    return complex(out[0]) if np.ndim(z) <= 1 else out


def hankel_image(f: CoefficientSeries, g: SymbolSpec, alpha) -> SymbolSpec:
    """Exact little Hankel image of polynomial data, a polynomial in ``conj(z)``.

    ``int (1-|zeta|^2)^al zeta^a conj(zeta)^b (1-zeta conj z)^-(al+2) dm
    = d_(b-a) pi B(b+1, al+1) conj(z)^(b-a)`` for ``b >= a`` and 0 otherwise.
    """
    C = product_tensor(f, g)
    n = f.dim
    alphas = _as_order(alpha).of_dim(n)
    A, B = C.shape[:n], C.shape[n:]
    factors = []
    for j in range(n):
        a = np.arange(A[j])[:, None]
        b = np.arange(B[j])[None, :]
        m = b - a
        val = np.where(
            m >= 0,
            np.pi * kernel_coeffs(alphas[j], np.maximum(m, 0)) * np.exp(betaln(b + 1.0, alphas[j] + 1.0)),
            0.0,
        )
        factors.append(val)
    terms: dict[tuple, complex] = {}
    for idx in zip(*np.nonzero(C)):
        a, b = idx[:n], idx[n:]
        coef = C[idx]
        for j in range(n):
            coef = coef * factors[j][a[j], b[j]]
        if coef != 0:
            key = tuple(bj - aj for aj, bj in zip(a, b))
            terms[key] = terms.get(key, 0.0) + coef
    if not terms:
        return SymbolSpec.constant(0.0, n)
    return SymbolSpec(tuple(SymbolTerm(c, (0,) * n, k) for k, c in sorted(terms.items())))


@lru_cache(maxsize=64)
def _berezin_radial_table(alpha: float, A: int, B: int, radii: tuple[float, ...]) -> np.ndarray:
    """``S[a, b, i]`` without the phase: pi sum_m d_(m+a-b) d_m B(a+m+1, al+1) rho^(2m+a-b)."""
    out = np.zeros((A, B, len(radii)))
    for i, rho in enumerate(radii):
        if rho == 0.0:
            for a in range(min(A, B)):
                out[a, a, i] = np.pi * np.exp(betaln(a + 1.0, alpha + 1.0))
            continue
        lr = math.log(rho)
        span = 2 * (abs(alpha) + 2 + max(A, B)) * math.log(2.0 + 1.0 / (1.0 - rho))
        L = int(math.ceil((46.0 + span) / (-2.0 * lr))) + 16
        m = np.arange(L + A + B + 1, dtype=float)
        logd = gammaln(alpha + 2 + m) - gammaln(alpha + 2) - gammaln(m + 1)
        for a in range(A):
            for b in range(B):
                lo = max(0, b - a)
                mm = m[lo : lo + L]
                expo = 2 * mm + a - b
                logt = (logd[(mm + a - b).astype(int)] + logd[mm.astype(int)]
                        + betaln(a + mm + 1.0, alpha + 1.0) + expo * lr)
                out[a, b, i] = np.pi * np.sum(np.exp(logt))
    out.setflags(write=False)
    return out


def berezin_image(f: CoefficientSeries, g: SymbolSpec, alpha) -> Callable:
    """Exact Berezin image of polynomial data as a vectorised callable ``B(*z)``.

    Uses both kernel expansions; the radial series is summed in log space until
    its terms fall below double precision.
    """
    C = product_tensor(f, g)
    n = f.dim
    alphas = _as_order(alpha).of_dim(n)
    shapeA, shapeB = C.shape[:n], C.shape[n:]

    def factor(j, zj):
        rho = np.abs(zj)
        if np.any(rho >= 1):
            raise ValueError("Berezin image needs |z_j| < 1")
        uniq, inv = np.unique(rho, return_inverse=True)
        table = _berezin_radial_table(alphas[j], shapeA[j], shapeB[j], tuple(uniq.tolist()))
        phase = np.exp(1j * np.angle(zj))
        a = np.arange(shapeA[j])[:, None, None]
        b = np.arange(shapeB[j])[None, :, None]
        pre = (alphas[j] + 1.0) / np.pi * (1.0 - rho**2) ** (alphas[j] + 2.0)
        return table[:, :, inv] * phase[None, None, :] ** (a - b) * pre[None, None, :]

    la, lb, lx = "abcdef"[:n], "ghijkl"[:n], "pqrstu"[:n]

    def image(*z):
        if len(z) != n:
            raise ValueError(f"expected {n} coordinates, got {len(z)}")
        zs = [np.asarray(x, dtype=complex) for x in z]
        shape = np.broadcast_shapes(*(x.shape for x in zs))
        if n > 1 and _is_open_mesh(zs):
            # open mesh from the quadrature driver: contract coordinate by coordinate
            facs = [factor(j, zs[j].ravel()) for j in range(n)]
            spec = la + lb + "," + ",".join(a + b + x for a, b, x in zip(la, lb, lx)) + "->" + lx
        else:
            zb = np.broadcast_arrays(*zs)
            facs = [factor(j, zb[j].ravel()) for j in range(n)]
            spec = la + lb + "," + ",".join(a + b + "p" for a, b in zip(la, lb)) + "->p"
        return np.einsum(spec, C, *facs, optimize=True).reshape(shape)

    return image


def _is_open_mesh(zs) -> bool:
    n = len(zs)
    for j, z in enumerate(zs):
        if z.ndim != n or any(z.shape[i] != 1 for i in range(n) if i != j):
            return False
    return True
