"""Weighted Bergman and Besov spaces on the polydisk.

Subpackages: :mod:`wsop.weights` (admissible weights), :mod:`wsop.pseries`
(truncated power series), :mod:`wsop.quad` (quadrature and norms),
:mod:`wsop.operators` (Toeplitz, little Hankel, Berezin-type) and
:mod:`wsop.probes` (verification experiments).
"""

__version__ = "0.1.0"
