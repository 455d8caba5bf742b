"""Exception types raised across the package."""


class GCLMError(Exception):
    """Base class for all package errors."""


class ValidationError(GCLMError, ValueError):
    """Invalid user input (shape, value range, file contents)."""


class DimensionMismatch(ValidationError):
    pass


class NumericalError(GCLMError):
    """A numerical routine failed on otherwise valid input."""


class ConvergenceFailure(NumericalError):
    pass


class SingularLyapunov(NumericalError):
    """Two eigenvalues of the drift matrix sum to (numerically) zero."""


class NotPositiveDefinite(NumericalError):
    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class MarginalNotUnique(NumericalError):
    """The retained block of B is not in Mat0, so the marginal equation is singular."""


class LineSearchStall(NumericalError):
    pass


class DegenerateColumn(ValidationError):
    pass
