"""Exception types raised across the package."""


class DNLSLabError(Exception):
    """Base class for all errors raised by dnlslab."""


class ConfigurationError(DNLSLabError, ValueError):
    """Invalid grid size, solver option or config entry."""


class DomainError(DNLSLabError, ValueError):
    """A time window or trajectory does not cover what an operation needs."""


class ResolutionError(DNLSLabError, ValueError):
    """A requested frequency is not resolved by the grid."""


class PreconditionError(DNLSLabError, ValueError):
    """Scenario input violates a stated precondition."""


class BlowUpError(DNLSLabError, RuntimeError):
    """Time stepping produced NaN/inf or exceeded the blow-up sentinel.

    ``last_time`` is the last time at which the state was finite and below
    the sentinel; ``trajectory`` holds the slices computed up to that time.
    """

    def __init__(self, message, last_time=None, trajectory=None):
        super().__init__(message)
        self.last_time = last_time
        self.trajectory = trajectory
