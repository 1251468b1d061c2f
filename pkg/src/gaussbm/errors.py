"""Exception types shared across the package."""

__all__ = [
    "GaussbmError",
    "DomainError",
    "UnsupportedFamilyError",
    "QuadratureError",
    "SamplingError",
    "InversionRangeError",
    "ContractionViolationError",
    "InequalityViolationError",
    "ConfigError",
]


class GaussbmError(Exception):
    """Base class for package errors."""


class DomainError(GaussbmError, ValueError):
    """Input outside the mathematical domain of an operation."""


class UnsupportedFamilyError(GaussbmError, ValueError):
    """Requested operation is out of scope for this family variant."""


class QuadratureError(GaussbmError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class SamplingError(GaussbmError, RuntimeError):
    """Sampling failed (e.g. rejection acceptance rate too low)."""


class InversionRangeError(GaussbmError, ValueError):
    """Map inversion requested outside the numerically covered range."""


class ContractionViolationError(GaussbmError, RuntimeError):
    """A map certificate exceeded the 1-Lipschitz bound; dependent checks abort."""


class InequalityViolationError(GaussbmError, AssertionError):
    """An asserted inequality failed beyond tolerance."""


class ConfigError(GaussbmError, ValueError):
    """Malformed experiment configuration."""
