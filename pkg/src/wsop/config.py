"""Run configuration: JSON parsing, validation and defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .operators import InnerFunctionSpec, KernelOrder, SymbolSpec
from .pseries import CoefficientSeries
from .weights import WeightSpec

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "PROBES"]

PROBES = (
    "radial-identity",
    "lemma1",
    "lemma2",
    "toeplitz",
    "division",
    "hankel",
    "hankel-sharpness",
    "berezin",
)

_KNOWN = {
    "probe", "n", "p", "weight", "alpha", "quadrature", "function", "symbol", "inner",
    "family", "r_list", "k", "expect", "alpha_scan", "seed", "lemma", "multi_index",
    "order", "cap", "output",
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    probe: str | None = None
    n: int = 1
    p: float = 2.0
    weight: WeightSpec = field(default_factory=lambda: WeightSpec.power(0.5))
    alpha: KernelOrder | None = None
    radial: int = 64
    angular: int = 128
    quadrature_explicit: bool = False
    function: CoefficientSeries | None = None
    symbol: SymbolSpec | None = None
    inner: InnerFunctionSpec | None = None
    family: dict | None = None
    r_list: tuple[float, ...] | None = None
    k: Any = None
    expect: str | None = None
    alpha_scan: tuple[float, ...] | None = None
    seed: int = 0
    lemma: dict = field(default_factory=dict)
    multi_index: tuple[int, ...] | None = None
    order: int | None = None
    cap: float | None = None
    out: str | None = None
    csv: str | None = None

    @property
    def q(self) -> float:
        """Conjugate exponent, ``1/p + 1/q = 1``."""
        return self.p / (self.p - 1.0)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "probe": self.probe,
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "weight": self.weight.to_json(),
            "quadrature": {"radial": self.radial, "angular": self.angular},
            "seed": self.seed,
        }
        if self.alpha is not None:
            out["alpha"] = list(self.alpha.alpha)
        if self.function is not None:
            out["function"] = self.function.to_json()
        if self.symbol is not None:
            out["symbol"] = self.symbol.to_json()
        if self.inner is not None:
            out["inner"] = self.inner.to_json()
        for name in ("family", "k", "expect", "cap", "order"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        if self.r_list is not None:
            out["r_list"] = list(self.r_list)
        if self.alpha_scan is not None:
            out["alpha_scan"] = list(self.alpha_scan)
        if self.multi_index is not None:
            out["multi_index"] = list(self.multi_index)
        if self.lemma:
            out["lemma"] = dict(self.lemma)
        return out


def _field(name: str, fn, value):
    try:
        return fn(value)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"field '{name}': {exc}") from None


def parse_config(data: dict, overrides: dict | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(data) - _KNOWN)
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
    overrides = overrides or {}
    kw: dict[str, Any] = {}

    probe = overrides.get("probe") or data.get("probe")
    if probe is not None and probe not in PROBES:
        raise ConfigError(f"field 'probe': unknown probe {probe!r}; expected one of {PROBES}")
    kw["probe"] = probe

    p = _field("p", float, data.get("p", 2.0))
    if not p > 1:
        raise ConfigError(f"field 'p': p must be > 1, got {p:g}")
    kw["p"] = p

    if "weight" in data:
        w = _field("weight", WeightSpec.from_json, data["weight"])
    else:
        w = None
    n = data.get("n")
    if n is None:
        n = w.dim if w is not None else 1
    n = _field("n", int, n)
    if n < 1:
        raise ConfigError("field 'n': dimension must be >= 1")
    if w is None:
        w = WeightSpec.power(0.5, n)
    elif w.dim == 1 and n > 1:
        w = WeightSpec(w.coords * n)
    elif w.dim != n:
        raise ConfigError(f"field 'weight': has {w.dim} coordinates, expected n = {n}")
    kw["n"], kw["weight"] = n, w

    if "alpha" in data:
        alpha = _field("alpha", KernelOrder, data["alpha"])
        try:
            alpha.of_dim(n)
        except ValueError as exc:
            raise ConfigError(f"field 'alpha': {exc}") from None
        kw["alpha"] = alpha

    quad = data.get("quadrature", {})
    if not isinstance(quad, dict):
        raise ConfigError("field 'quadrature': expected an object")
    radial = overrides.get("radial") or quad.get("radial", 64)
    angular = overrides.get("angular") or quad.get("angular", 128)
    kw["radial"] = _field("quadrature.radial", int, radial)
    kw["angular"] = _field("quadrature.angular", int, angular)
    if kw["radial"] < 1 or kw["angular"] < 4:
        raise ConfigError("field 'quadrature': need radial >= 1 and angular >= 4")
    kw["quadrature_explicit"] = bool(quad) or bool(overrides.get("radial") or overrides.get("angular"))

    if "function" in data:
        f = _field("function", CoefficientSeries.from_json, data["function"])
        if f.dim != n:
            raise ConfigError(f"field 'function': dimension {f.dim} != n = {n}")
        kw["function"] = f
    if "symbol" in data:
        s = _field("symbol", SymbolSpec.from_json, data["symbol"])
        if s.dim != n:
            raise ConfigError(f"field 'symbol': dimension {s.dim} != n = {n}")
        kw["symbol"] = s
    if "inner" in data:
        J = _field("inner", InnerFunctionSpec.from_json, data["inner"])
        if J.dim != n:
            raise ConfigError(f"field 'inner': dimension {J.dim} != n = {n}")
        kw["inner"] = J
    if "family" in data:
        if not isinstance(data["family"], dict):
            raise ConfigError("field 'family': expected an object")
        kw["family"] = dict(data["family"])
    if "r_list" in data:
        r_list = _field("r_list", lambda v: tuple(float(x) for x in v), data["r_list"])
        if not r_list or any(not 0 < r < 1 for r in r_list):
            raise ConfigError("field 'r_list': radii must lie in (0, 1)")
        kw["r_list"] = r_list
    if "alpha_scan" in data:
        scan = _field("alpha_scan", lambda v: tuple(float(x) for x in v), data["alpha_scan"])
        if any(a <= -1 for a in scan):
            raise ConfigError("field 'alpha_scan': entries must be > -1")
        kw["alpha_scan"] = scan
    if "expect" in data:
        if data["expect"] not in ("bounded", "diverging"):
            raise ConfigError("field 'expect': must be 'bounded' or 'diverging'")
        kw["expect"] = data["expect"]
    if "k" in data:
        kw["k"] = data["k"]
    if "lemma" in data:
        if not isinstance(data["lemma"], dict):
            raise ConfigError("field 'lemma': expected an object with 'a' and 'b'")
        kw["lemma"] = {key: _field(f"lemma.{key}", float, v) for key, v in data["lemma"].items()}
    if "multi_index" in data:
        kw["multi_index"] = _field("multi_index", lambda v: tuple(int(x) for x in v), data["multi_index"])
    if "order" in data:
        kw["order"] = _field("order", int, data["order"])
    if "cap" in data:
        kw["cap"] = _field("cap", float, data["cap"])

    seed = overrides.get("seed")
    kw["seed"] = _field("seed", int, data.get("seed", 0) if seed is None else seed)

    output = data.get("output", {})
    kw["out"] = overrides.get("out") or output.get("json")
    kw["csv"] = overrides.get("csv") or output.get("csv")
    return RunConfig(**kw)


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Read and validate a JSON config; ``path=None`` gives the defaults."""
    if path is None:
        return parse_config({}, overrides)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data, overrides)
