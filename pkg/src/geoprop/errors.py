"""Exception and warning classes raised by geoprop."""


class GeopropError(Exception):
    """Base class for all geoprop errors."""


class ValidationError(GeopropError, ValueError):
    """Input violates a documented precondition."""


class NotTransversal(ValidationError):
    pass


class ParallelLeaves(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class ZeroNorm(ValidationError):
    pass


class ModeTooHigh(ValidationError):
    pass


class EmptyTargetGrid(ValidationError):
    pass


class NonpositiveScale(ValidationError):
    pass


class AliasingRisk(ValidationError):
    """A kernel or potential phase is under-sampled by the grid."""


class ZeroTime(ValidationError):
    pass


class SingularTime(ValidationError):
    """Propagation time sits on a caustic of the classical flow.

    ``safe_times`` lists the nearest regular times on either side.
    """

    def __init__(self, message, safe_times=()):
        super().__init__(message)
        self.safe_times = tuple(safe_times)


class TimeOutOfDomain(ValidationError):
    pass


class EmptyTestset(ValidationError):
    pass


class TooFewFrames(ValidationError):
    pass


class EdgeWarning(UserWarning):
    """Sampled data is not contained in the window it is being moved to or from."""


class SupportEscape(UserWarning):
    """Part of the norm left the output window of a kernel application."""
