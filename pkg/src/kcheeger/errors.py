"""Exception hierarchy shared by every kcheeger module."""


class KCheegerError(Exception):
    """Base class for all errors raised by kcheeger."""


class ParameterError(KCheegerError, ValueError):
    """An argument is outside the range an operation accepts."""

    def __init__(self, message, param=None):
        self.param = param
        super().__init__(message)


class ParseError(KCheegerError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(KCheegerError, ValueError):
    """Input parsed but violates a structural rule (self-loop, duplicate edge...)."""


class DomainError(KCheegerError, ValueError):
    """A ratio or quantity is undefined for the given input."""


class NumericalError(KCheegerError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class CapacityError(KCheegerError):
    """Exhaustive enumeration would exceed the supported problem size."""


class SearchFailure(KCheegerError):
    """Every sampled partition was discarded."""

    def __init__(self, message, discarded=0):
        self.discarded = discarded
        super().__init__(message)
