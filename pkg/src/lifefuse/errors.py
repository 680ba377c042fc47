"""Exception hierarchy shared by every lifefuse module."""


class LifeFuseError(Exception):
    pass


class InvalidArgumentError(LifeFuseError, ValueError):
    pass


class DegenerateSignalError(LifeFuseError, ValueError):
    """Raised when a signal has too few extrema to fit an envelope."""


class NumericalFailure(LifeFuseError, ArithmeticError):
    """A loss or gradient became non-finite.

    ``where`` names the parameter, epoch or batch at which it happened.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ConflictError(LifeFuseError, ValueError):
    """Dempster combination of totally conflicting evidence (K = 1)."""


class ParseError(LifeFuseError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ParseError):
    pass
