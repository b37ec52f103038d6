"""Exception types shared across the package."""


class TauscreenError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(TauscreenError, ValueError):
    """An argument violates a documented precondition."""


class SingularMatrixError(TauscreenError, ValueError):
    """A matrix required to be positive definite is not."""


class MissingInputError(TauscreenError, ValueError):
    """A required companion input (e.g. a variance matrix) was not supplied."""


class DegenerateColumnError(TauscreenError, ValueError):
    """A data column is constant where variation is required."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column!r} is constant")
