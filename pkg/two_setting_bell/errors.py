"""Exception types shared across the toolkit."""


class BellToolkitError(Exception):
    """Base class for every error raised on purpose by this package."""

    exit_code = 1


class ValidationError(BellToolkitError, ValueError):
    """An input violates a documented precondition."""

    exit_code = 2


class CapacityError(BellToolkitError):
    """A request exceeds one of the fixed size caps (dimension, party count)."""

    exit_code = 3
