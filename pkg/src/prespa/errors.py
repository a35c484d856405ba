"""Exception types raised across the package."""


class PrespaError(Exception):
    """Base class for all package errors."""


class InvalidDimension(PrespaError, ValueError):
    pass


class InvalidInput(PrespaError, ValueError):
    pass


class TruncationError(PrespaError):
    pass


class ImpossibleTrajectory(PrespaError):
    pass


class LeakageError(PrespaError):
    """State has weight outside the expected Fock support.

    The leaked weight is stored on ``self.leaked``.
    """

    def __init__(self, message, leaked=None):
        super().__init__(message)
        self.leaked = leaked


class FitError(PrespaError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IntegrationError(PrespaError):
    pass


class NonUniqueSteadyState(PrespaError):
    pass


class ReconstructionError(PrespaError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class UndefinedElement(PrespaError):
    pass


class OptimizerError(PrespaError):
    pass


class TruncationWarning(UserWarning):
    pass
