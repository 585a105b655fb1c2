"""Exception hierarchy shared by every module of the toolkit."""


class StpGameError(Exception):
    """Base class; the CLI maps any subclass to a nonzero exit status."""


class SizeCapExceeded(StpGameError, MemoryError):
    """A materialized result would exceed the configured entry cap."""


class DimensionError(StpGameError, ValueError):
    pass


class SingularFactorError(StpGameError, ArithmeticError):
    """An explicit inverse was requested on a singular or ill-conditioned matrix.

    ``factor`` names the offending matrix so reports can say which step failed.
    """

    def __init__(self, factor, message=None):
        self.factor = factor
        super().__init__(message or f"{factor} singular")


class ConvergenceError(StpGameError, RuntimeError):
    pass


class SchemaError(StpGameError, ValueError):
    """Input document does not match the expected layout; ``field`` points at it."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
