"""Probe reports: a parameter echo, a sample table, a summary and a verdict."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"
VERDICTS = (PASS, FAIL, INCONCLUSIVE)
REFINE_TOL = 0.01  # relative movement under rule doubling that makes a number unreliable


def clean(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays to JSON types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [clean(obj.real), clean(obj.imag)]
    return obj


@dataclass(frozen=True)
class ProbeReport:
    probe: str
    params: dict
    samples: tuple[tuple[str, float], ...]
    summary: dict
    verdict: str
    notes: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")
        object.__setattr__(self, "samples", tuple((str(i), float(v)) for i, v in self.samples))
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self, include_metadata: bool = True) -> dict:
        out = {
            "probe": self.probe,
            "params": clean(self.params),
            "samples": [{"id": i, "value": clean(v)} for i, v in self.samples],
            "summary": clean(self.summary),
            "verdict": self.verdict,
            "notes": list(self.notes),
        }
        if include_metadata:
            out["metadata"] = clean(self.metadata)
        return out

    def canonical_json(self) -> str:
        """Deterministic serialisation (metadata excluded)."""
        return json.dumps(self.to_json(False), sort_keys=True, separators=(",", ":"), allow_nan=False)

    def dumps(self) -> str:
        return json.dumps(self.to_json(True), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "value"])
        for i, v in self.samples:
            writer.writerow([i, repr(v)])
        return buf.getvalue()

    def write(self, json_path: str | Path | None = None, csv_path: str | Path | None = None):
        if json_path is not None:
            Path(json_path).write_text(self.dumps())
            if csv_path is None:
                csv_path = Path(json_path).with_suffix(".csv")
        if csv_path is not None:
            Path(csv_path).write_text(self.csv_text())


def rel_change(a: float, b: float, floor: float = 0.0) -> float:
    """``|a - b| / |b|``; differences below ``floor`` count as zero movement."""
    if not (math.isfinite(a) and math.isfinite(b)):
        return math.inf
    diff = abs(a - b)
    if diff <= floor:
        return 0.0
    return diff / abs(b) if b != 0 else math.inf


def refinement_verdict(verdict: str, movement: float, notes: list[str]) -> str:
    """Downgrade to INCONCLUSIVE when rule doubling moved a headline number > 1%."""
    if movement > REFINE_TOL:
        notes.append(f"rule doubling moved a headline number by {movement:.2%}")
        return INCONCLUSIVE
    return verdict
