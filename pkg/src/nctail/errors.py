"""Exception hierarchy shared by every module of the package."""


class NctError(Exception):
    """Base class for all errors raised by :mod:`nctail`."""


class DomainError(NctError, ValueError):
    """An argument lies outside the domain of the function."""


class RangeError(NctError, ValueError):
    """A root-finding problem has no solution in the searched range."""


class NumericError(NctError, ArithmeticError):
    """A computation produced a non-finite value."""


class ConvergenceError(NumericError):
    """An iterative method stopped before reaching its tolerance.

    ``best`` holds the best available estimate and ``bracket`` the last
    interval known to contain the answer (either may be ``None``).
    """

    def __init__(self, message, best=None, bracket=None):
        super().__init__(message)
        self.best = best
        self.bracket = bracket
