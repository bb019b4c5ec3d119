"""Deterministic families of test functions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from ..operators import InnerFunctionSpec, inner_taylor
from ..pseries import CoefficientSeries, kernel_series, random_polynomial

KINDS = ("random", "monomials", "kernel", "blaschke")


@dataclass(frozen=True)
class TestFamily:
    """A named, reproducible list of polynomials.

    ``random``    -- ``count`` dense polynomials of the given degree, drawn in order
                     from ``default_rng(seed)`` (so smaller families are prefixes);
    ``monomials`` -- every ``z^k`` with ``k_j <= degree``;
    ``kernel``    -- truncations of ``prod (1 - r z_j)^-k`` for each ``r`` in ``r_list``;
    ``blaschke``  -- Taylor truncations (to ``degree``) of one Blaschke factor per
                     coordinate for each zero in ``zeros``.
    """

    __test__ = False  # not a pytest class

    kind: str = "random"
    dim: int = 1
    degree: int = 8
    count: int = 50
    seed: int = 7
    r_list: tuple[float, ...] = (0.5, 0.7, 0.9)
    k: float = 2.0
    zeros: tuple[complex, ...] = (0.5, 0.7j, -0.3)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {KINDS}")
        if self.dim < 1 or self.degree < 0 or self.count < 1:
            raise ValueError("family needs dim >= 1, degree >= 0 and count >= 1")
        object.__setattr__(self, "r_list", tuple(float(r) for r in self.r_list))
        object.__setattr__(self, "zeros", tuple(complex(z) for z in self.zeros))
        if self.kind == "kernel" and not self.r_list:
            raise ValueError("kernel family needs a non-empty r_list")
        if self.kind == "blaschke" and not self.zeros:
            raise ValueError("blaschke family needs at least one zero")

    def members(self) -> list[tuple[str, CoefficientSeries]]:
        n = self.dim
        if self.kind == "random":
            rng = np.random.default_rng(self.seed)
            return [(f"rand{i}", random_polynomial(n, self.degree, rng)) for i in range(self.count)]
        if self.kind == "monomials":
            out = []
            for k in itertools.product(range(self.degree + 1), repeat=n):
                out.append(("z^" + "_".join(map(str, k)), CoefficientSeries.monomial(k)))
            return out
        if self.kind == "kernel":
            return [
                (f"kernel_r{r:g}", kernel_series([r] * n, [self.k] * n, tol=1e-12))
                for r in self.r_list
            ]
        out = []
        for a in self.zeros:
            J = InnerFunctionSpec(((a,),) * n)
            out.append((f"blaschke_{a.real:g}{a.imag:+g}j", inner_taylor(J, self.degree)))
        return out

    def enlarged(self) -> "TestFamily":
        """The family used for the stability check: twice the members where that makes sense."""
        if self.kind == "random":
            return replace(self, count=2 * self.count)
        if self.kind == "monomials":
            return replace(self, degree=2 * self.degree)
        return self

    def to_json(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.kind == "random":
            out.update(count=self.count, degree=self.degree, seed=self.seed)
        elif self.kind == "monomials":
            out.update(degree=self.degree)
        elif self.kind == "kernel":
            out.update(r_list=list(self.r_list), k=self.k)
        else:
            out.update(degree=self.degree, zeros=[[z.real, z.imag] for z in self.zeros])
        return out

    @classmethod
    def from_json(cls, data: dict, dim: int | None = None) -> "TestFamily":
        kw = dict(data)
        if dim is not None:
            kw.setdefault("dim", dim)
        if "zeros" in kw:
            kw["zeros"] = tuple(
                complex(z[0], z[1]) if isinstance(z, (list, tuple)) else complex(z) for z in kw["zeros"]
            )
        if "r_list" in kw:
            kw["r_list"] = tuple(kw["r_list"])
        allowed = set(cls.__dataclass_fields__)
        unknown = set(kw) - allowed
        if unknown:
            raise ValueError(f"unknown family fields: {sorted(unknown)}")
        return cls(**kw)

