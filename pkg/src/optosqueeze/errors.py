"""Exception hierarchy shared by all solvers."""


class SqueezeError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(SqueezeError, ValueError):
    pass


class UnstableRatio(SqueezeError, ValueError):
    """G+ >= G-: the squeeze parameter is undefined."""


class NumericalFailure(SqueezeError, ArithmeticError):
    """Base class for failures the CLI reports with exit code 2."""


class NotHurwitz(NumericalFailure):
    pass


class SingularSystem(NumericalFailure):
    pass


class NonFinite(NumericalFailure):
    pass


class NotConverged(NumericalFailure):
    pass


class UnstableReduced(NumericalFailure):
    """Effective master equation has gamma_down <= gamma_up."""


class SingularResponse(NumericalFailure):
    pass


class QuadratureNotConverged(NumericalFailure):
    pass


class NoInteriorMinimum(NumericalFailure):
    """The scanned minimum sits on a bound of the search interval."""

    def __init__(self, message, ratio, value):
        super().__init__(message)
        self.ratio = ratio
        self.value = value
