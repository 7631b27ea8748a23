"""dnlslab: pseudospectral laboratory for the periodic derivative NLS."""

from .errors import (
    BlowUpError,
    ConfigurationError,
    DNLSLabError,
    DomainError,
    PreconditionError,
    ResolutionError,
)
from .torus import TorusField, Trajectory

__version__ = "0.1.0"

__all__ = [
    "TorusField",
    "Trajectory",
    "DNLSLabError",
    "ConfigurationError",
    "DomainError",
    "ResolutionError",
    "PreconditionError",
    "BlowUpError",
]
