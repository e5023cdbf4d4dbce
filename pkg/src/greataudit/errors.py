"""Exception types shared across the package.

The CLI maps these onto process exit codes, so the distinction matters:
bad *inputs* (malformed files, invalid parameters, unreachable synthesis
targets) are :class:`DataValidationError`, while quantities that are
mathematically undefined for an otherwise valid input (e.g. a disparity
index over fewer than two populated classes) are
:class:`MetricUndefinedError`.
"""


class DataValidationError(ValueError):
    """Raised when an input file, array, or parameter fails validation."""


class MetricUndefinedError(ValueError):
    """Raised when a metric is undefined for the given (valid) input."""


class InfeasibleTargetError(DataValidationError):
    """Raised when a requested synthetic per-class score cannot be realised.

    Scores live in [0, sqrt(pi/2)); the supremum is approached only as the
    activation saturates, so any target at or above it is unreachable.
    """
