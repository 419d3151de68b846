"""Simulation and analysis toolkit for a degenerate optical parametric
oscillator tuned to one Laguerre-Gauss transverse family."""
from importlib.metadata import PackageNotFoundError, version as _version

from .errors import (DopoError, ExcessiveDivergenceError, GeometryError, NotSteadyStateError,
                     NumericalError, SeriesTooShortError, SpectrumDivergenceError,
                     ValidationError)

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
