"""Exception types shared across the package."""


class GroverEntanglementError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(GroverEntanglementError, ValueError):
    """An input violates a documented precondition."""


class OutOfRangeError(InvalidArgumentError):
    """A numeric parameter lies outside its admissible range."""


class ResourceLimitError(GroverEntanglementError):
    """The requested computation exceeds a configured size cap."""


class InternalConsistencyError(GroverEntanglementError, RuntimeError):
    """A self-check on a computed result failed."""
