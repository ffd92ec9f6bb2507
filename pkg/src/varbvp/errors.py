"""Exception types raised by the package."""


class VarBVPError(Exception):
    """Base class for all package errors."""


class InvalidInputError(VarBVPError, ValueError):
    """Shapes, lengths or values that violate an operation's preconditions."""


class SchemaError(InvalidInputError):
    """A problem file does not match the expected document layout."""


class PreconditionError(VarBVPError):
    """A mathematical precondition (A3, positive definiteness, ...) fails."""


class UnsupportedSizeError(VarBVPError):
    """Requested instance is too large for an exhaustive method."""


class DivergenceError(VarBVPError):
    """The objective became non-finite during a solve."""


class QuadratureError(VarBVPError):
    """Adaptive quadrature exhausted its subdivision budget.

    The best available estimate is kept on ``estimate``.
    """

    def __init__(self, message, estimate, error_estimate):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class ContinuationError(VarBVPError):
    """A solve inside a continuation sweep did not converge.

    ``report`` holds the records gathered before the failure.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
