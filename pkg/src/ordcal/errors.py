"""Exception types shared across the toolkit."""


class OrdcalError(Exception):
    """Base class for all toolkit errors."""


class DomainError(OrdcalError):
    """A numeric evaluation left the valid domain (overflow, non-finite result)."""


class SingularModelError(OrdcalError):
    """The distortion level reached zero or below, so the model cannot be applied."""


class OutOfRangeError(OrdcalError):
    """A requested radius lies outside the invertible range of the radial map."""


class ConversionError(OrdcalError):
    """The level/coefficient linear system is singular or too ill-conditioned."""


class EstimationError(OrdcalError):
    """Nonlinear parameter estimation failed to converge.

    Carries the best iterate seen so far in ``best_result``.
    """

    def __init__(self, message, best_result=None):
        super().__init__(message)
        self.best_result = best_result


class ConfigurationError(OrdcalError):
    """A configuration (ranges, counts, paths) cannot produce valid samples."""
