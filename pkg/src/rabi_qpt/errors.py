"""Exception types raised by the package."""


class RabiError(Exception):
    """Base class for all package errors."""


class DegenerateGroundStateError(RabiError):
    """Lowest two eigenvalues closer than the degeneracy threshold."""


class SolverError(RabiError):
    """A linear or eigen solve failed its residual check."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConvergenceError(RabiError):
    """Fock truncation hit its cap before the susceptibility settled."""


class PeakError(RabiError):
    """Peak search precondition violated (boundary maximum, several maxima)."""


class CollapseError(RabiError):
    """Data collapse could not be carried out or ended on an interval endpoint."""


class ConfigError(RabiError):
    """Invalid run configuration; the message names the offending key."""
