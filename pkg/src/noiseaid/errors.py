"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented contract (dimensions, signs,
    matrix definiteness, malformed configuration)."""
