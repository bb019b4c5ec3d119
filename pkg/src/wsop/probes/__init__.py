"""Numerical experiments, one per estimate, each returning a :class:`ProbeReport`."""

from .families import TestFamily
from .lemmas import probe_lemma1, probe_lemma2, probe_radial_identity
from .report import FAIL, INCONCLUSIVE, PASS, ProbeReport
from .sharpness import SharpnessFamily, probe_hankel_sharpness
from .theorems import (
    probe_berezin_bounded,
    probe_division,
    probe_hankel_bounded,
    probe_toeplitz_bounded,
)

__all__ = [
    "PASS",
    "FAIL",
    "INCONCLUSIVE",
    "ProbeReport",
    "TestFamily",
    "SharpnessFamily",
    "probe_radial_identity",
    "probe_lemma1",
    "probe_lemma2",
    "probe_toeplitz_bounded",
    "probe_division",
    "probe_hankel_bounded",
    "probe_hankel_sharpness",
    "probe_berezin_bounded",
]
