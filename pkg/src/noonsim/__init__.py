"""Simulation and analysis of multi-photon NOON-state interferometry with a
group-velocity-matched SPDC source at telecom wavelengths."""

from .errors import ConfigurationError, DomainError, FitError

__version__ = "0.1.0"

__all__ = ["ConfigurationError", "DomainError", "FitError", "__version__"]
