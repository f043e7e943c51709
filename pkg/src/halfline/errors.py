"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class ResolutionError(ValidationError):
    """Raised when a grid cannot resolve the oscillation scale of a computation."""


class ResolutionWarning(UserWarning):
    """Emitted when a computation proceeds on a grid that underresolves it."""
