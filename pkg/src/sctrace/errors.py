"""Exception hierarchy shared by every module."""


class SctraceError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(SctraceError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class UnsupportedVariantError(SctraceError, TypeError):
    """The operation does not apply to this kind of system."""


class UnsupportedDegeneracyError(SctraceError):
    """A critical point with vanishing curvature was found."""


class NumericalFailure(SctraceError, ArithmeticError):
    """An iterative computation did not converge.

    ``iterates`` holds the last estimates produced before giving up.
    """

    def __init__(self, message, iterates=None):
        super().__init__(message)
        self.iterates = iterates


class SingularAmplitudeError(SctraceError, ArithmeticError):
    """A trace-formula term has Tr M - 2 <= 0."""


class OutOfValidityError(SctraceError):
    """The requested temperature is outside the range of an expansion."""


class TruncationError(SctraceError):
    """A level sum cannot be truncated with the available levels."""


class ConfigError(SctraceError):
    """Invalid run configuration. ``key`` is the dotted path of the culprit."""

    def __init__(self, message, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key
