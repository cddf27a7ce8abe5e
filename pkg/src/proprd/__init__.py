"""Rate-distortion functions of stationary sources under weighted mean-square error."""

__version__ = "0.1.0"

from . import oracle, ratefn, spectra, waterfill  # noqa: E402,F401
from .errors import (  # noqa: E402,F401
    ConvergenceError, DomainError, NonIntegrableError, RangeError, UnsupportedError, ValidityError,
)
