"""Exception hierarchy shared by all modules."""


class TorusFilterError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrixError(TorusFilterError):
    pass


class NotExpandingError(TorusFilterError):
    pass


class OffGridError(TorusFilterError):
    pass


class IncompatibleGridError(TorusFilterError):
    pass


class WrongCountError(TorusFilterError):
    pass


class NotProjectionError(TorusFilterError):
    pass


class NotQ2Error(TorusFilterError):
    pass


class NotNormalizedError(TorusFilterError):
    pass


class NotUnitError(TorusFilterError):
    pass


class TooFarToNormalizeError(TorusFilterError):
    """Raised when a projected approximant is too small to renormalize."""


class NoCoefficientFormError(TorusFilterError):
    pass


class MismatchedDilationError(TorusFilterError):
    pass


class BadDepthError(TorusFilterError):
    pass


class OffSphereError(TorusFilterError):
    pass


class PoleSingularityError(TorusFilterError):
    pass


class BadResolutionError(TorusFilterError):
    pass


class IoFailureError(TorusFilterError):
    pass


class ParseError(TorusFilterError):
    pass
