"""traceblocks: block-diagonal trace-class operators with Fourier/Hartley
eigenblocks, partial-sum diagnostics, and a sampled Wilson-basis realization."""

__version__ = "0.1.0"

from . import bases, diagnostics, operators, timefreq  # noqa: E402,F401
from .errors import (DomainError, NumericalError, ParameterError,  # noqa: F401
                     ResourceLimitError, UsageError)

__all__ = [
    "__version__",
    "bases",
    "diagnostics",
    "operators",
    "timefreq",
    "DomainError",
    "NumericalError",
    "ParameterError",
    "ResourceLimitError",
    "UsageError",
]
