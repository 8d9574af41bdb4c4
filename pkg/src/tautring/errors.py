"""Exception types shared across the package."""


class TautringError(Exception):
    """Base class for package errors."""


class InvalidInput(TautringError, ValueError):
    """Raised for malformed or unstable input data."""


class BudgetExceeded(TautringError):
    """A computation would exceed its configured size budget.

    Raised before any partial result is returned.
    """


class InvariantViolation(TautringError, AssertionError):
    """An internal consistency check failed."""
