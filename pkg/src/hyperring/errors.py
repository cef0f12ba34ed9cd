"""Exception hierarchy shared by all modules."""


class HyperringError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(HyperringError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class InvalidCouplingError(ConfigError):
    pass


class GridResolutionError(ConfigError):
    """The detuning grid cannot resolve the linewidth or the pump bandwidth."""


class GridMismatchError(ConfigError):
    pass


class InfeasiblePowerError(ConfigError):
    pass


class DimensionOverflowError(ConfigError):
    pass


class NumericAccuracyError(HyperringError, ArithmeticError):
    """A quadrature did not reach its tolerance (CLI exit code 3).

    The achieved relative error estimate is stored on ``achieved``.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PeakOnBoundaryError(NumericAccuracyError):
    pass


class SupportLeakError(NumericAccuracyError):
    pass


class ConsistencyError(HyperringError, AssertionError):
    """An internal invariant (Hermiticity, trace, positivity) was violated."""
