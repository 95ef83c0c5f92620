"""Exception types shared across the package."""


class GtodaError(Exception):
    """Base class for all package-specific errors."""


class FactorizationBlowUp(GtodaError):
    """A leading principal minor vanished during Gauss elimination.

    For the Toda flow by factorization this is the blow-up detection point;
    the offending pivot index and (if known) time are attached.
    """

    def __init__(self, message, pivot_index=None, time=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.time = time


class DomainError(GtodaError):
    """Input lies outside the required domain (e.g. a non-positive minor)."""


class SpectrumError(GtodaError):
    """Spectrum of a Lax matrix is inconsistent with the requested data."""


class DegenerateNodes(GtodaError):
    """Repeated nodes passed to a formula that requires distinct ones."""


class ConvergenceError(GtodaError):
    """An iterative solver failed to reach its tolerance."""
