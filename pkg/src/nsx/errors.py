"""Exception types shared across the package."""


class NsxError(Exception):
    """Base class for all package-specific errors."""


class InvalidTime(NsxError):
    pass


class InvalidExponent(NsxError):
    pass


class InvalidArgument(NsxError):
    pass


class GridMismatch(NsxError):
    pass


class UnderresolvedMollifier(NsxError):
    pass


class ScaleOutOfBox(NsxError):
    pass


class SeedOutOfBox(NsxError):
    pass


class NotCalibrated(NsxError):
    pass


class VacuousCorpus(NsxError):
    pass


class NoClosure(NsxError):
    """Bootstrap quadratic has no real root: the fixed-point ball does not close."""


class QuadratureUnderResolved(NsxError):
    pass


class NoConvergence(NsxError):
    pass


class Diverged(NsxError):
    """Time integration produced NaN/overflow.

    Carries ``last_valid_time`` so callers can report how far the run got.
    """

    def __init__(self, message: str, last_valid_time: float = 0.0):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class StepTooLarge(NsxError):
    pass
