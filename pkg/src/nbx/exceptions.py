"""Exception types shared across the package."""


class NbxError(Exception):
    """Base class for all package errors."""


class ConfigError(NbxError, ValueError):
    """Invalid user configuration (bad flags, malformed specs)."""


class ToleranceNotReachedError(NbxError):
    """A certified error bound could not be pushed below the requested
    tolerance within the configured segment budget."""

    def __init__(self, message, achieved=None, requested=None):
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested


class ConvergenceError(NbxError):
    """Grid doubling failed to stabilise a computed quantity."""


class GridInstabilityError(NbxError):
    """A grid-doubling certificate moved a reported value by more than the
    allowed fraction."""


class IllConditionedError(NbxError):
    """Regularised normal-equation solve left a residual above threshold."""


class OptimizationError(NbxError):
    """A scalar or vector minimisation failed to bracket / make progress."""


class NotQuasiConcaveError(NbxError, ValueError):
    """Input sample violates monotonicity requirements."""
