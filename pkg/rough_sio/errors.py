"""
Exception hierarchy shared by all rough_sio modules
"""


class RoughSIOError(Exception):
    """Base class for rough_sio failures."""


class DomainError(RoughSIOError, ValueError):
    """Argument lies outside the domain of the requested operation."""


class ConfigurationError(RoughSIOError):
    """A document or configuration value is malformed or missing."""

    def __init__(self, message: str, field: str = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class NonConvergenceError(RoughSIOError):
    """Quadrature refinement did not settle within tolerance."""


class ResolutionError(RoughSIOError):
    """Requested construction exceeds the supported resolution."""


class RefinementRequestError(RoughSIOError):
    """Error estimate of a representation-formula evaluation exceeds tolerance."""


class UnsupportedHypothesisError(RoughSIOError):
    """A hypothesis required by the evaluated formula does not hold."""


class UncertifiedWeightError(RoughSIOError):
    """The weight was not certified for the requested condition."""
