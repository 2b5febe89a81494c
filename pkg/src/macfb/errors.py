"""Exception types shared across the package."""


class MacFbError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(MacFbError, ValueError):
    """A numeric argument violates a documented precondition."""


class TableValidationError(InvalidParameterError):
    """A probability table is malformed; the message names the offending slice."""


class ProtocolOrderError(MacFbError, RuntimeError):
    """A codec state machine was driven out of its slot order."""


class ConvergenceError(MacFbError, RuntimeError):
    """An iterative solver failed to converge; `residual` holds the last error."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
