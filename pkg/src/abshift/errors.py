"""Exception types raised by the numerical routines."""


class DomainError(ValueError):
    """Argument outside the domain where a routine is defined or trusted."""


class NumericalError(ArithmeticError):
    """Base class for truncation and tolerance failures.

    ``achieved`` carries the error estimate that was reached when the
    routine gave up, so callers can report it or retry with larger limits.
    """

    def __init__(self, message, achieved=None, suggestion=None):
        super().__init__(message)
        self.achieved = achieved
        self.suggestion = suggestion


class TailNotConverged(NumericalError):
    pass


class WindingTailNotConverged(NumericalError):
    pass


class QuadratureTailError(NumericalError):
    pass


class CutoffInsufficient(NumericalError):
    pass


class SeriesTailError(NumericalError):
    pass


class SingularTime(DomainError):
    pass
