"""Exception types shared across the package."""


class PhotonOpsError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(PhotonOpsError):
    """Operands act on incompatible Hilbert spaces."""


class LeakageError(PhotonOpsError):
    """A truncated representation would drop non-negligible weight."""


class InvariantViolationError(PhotonOpsError):
    """A density-matrix invariant (hermiticity/trace/positivity) is broken."""


class NotConvergedError(PhotonOpsError):
    """Steady-state residual never dropped below tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class GridSearchError(PhotonOpsError):
    """Too many grid points failed to produce a fidelity value."""


class ConfigError(PhotonOpsError):
    """A run configuration file is missing, malformed, or inconsistent."""
