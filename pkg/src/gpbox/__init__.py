"""gpbox: pseudo-spectral Gross-Pitaevskii toolkit on a periodic box."""

__version__ = "0.1.0"

from . import multilinear as _multilinear  # noqa: F401  (registry)
from . import resonance as _resonance  # noqa: F401  (registers divisor symbols)
