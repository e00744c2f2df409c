"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigurationError(ValueError):
    """A configuration is malformed, incomplete or numerically unusable."""


class FitError(RuntimeError):
    """A fringe fit did not converge."""
