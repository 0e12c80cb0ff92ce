"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad inputs: malformed files, inconsistent metadata, invalid config."""


class NumericError(RuntimeError):
    """A computation could not proceed (degenerate data, failed convergence)."""
