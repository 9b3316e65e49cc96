"""Exception hierarchy shared by all modules."""


class CoopRangingError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CoopRangingError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateGeometryError(CoopRangingError):
    """Receiver and satellite are too close to define a line of sight."""


class SingularGeometryError(CoopRangingError):
    """The normal matrix is rank deficient or too poorly conditioned."""


class InsufficientObservationsError(CoopRangingError):
    """Not enough satellites to determine the unknowns."""


class ConvergenceError(CoopRangingError):
    """Gauss-Newton iteration diverged."""


class TimeMismatchError(CoopRangingError):
    """Two epochs carry different GPS time tags."""


class EncodingError(CoopRangingError, ValueError):
    """A piggyback message violates its invariants and cannot be encoded."""


class MalformedMessageError(CoopRangingError, ValueError):
    """A piggyback buffer is inconsistent with its own header."""


class TruncatedMessageError(MalformedMessageError):
    """A piggyback buffer is shorter than the fixed header."""


class ParseError(CoopRangingError, ValueError):
    """An epoch file record could not be parsed."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
