"""Exception hierarchy shared by every module of the package."""


class YBLabError(Exception):
    """Base class for all package errors."""


class NumericalError(YBLabError, ArithmeticError):
    """NaN or otherwise non-finite input reached a numerical kernel."""


class PoleError(YBLabError, ArithmeticError):
    pass


class NomeDomainError(YBLabError, ValueError):
    pass


class StripError(YBLabError, ValueError):
    """Evaluation requested outside the strip where a representation converges."""


class ContourError(YBLabError, ValueError):
    pass


class DomainError(YBLabError, ValueError):
    pass


class ConvergenceError(YBLabError, RuntimeError):
    pass


class BudgetExhausted(ConvergenceError):
    """Adaptive refinement ran out of budget.

    The best available estimate is attached so callers can still report it.
    """

    def __init__(self, message, value=None, error_estimate=None, evaluations=0):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations


class TailNotDecaying(ConvergenceError):
    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class KindMismatch(YBLabError, TypeError):
    pass


class RealityViolation(YBLabError, ArithmeticError):
    pass


class TooManyInternalSites(YBLabError, ValueError):
    pass


class ErgodicityWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass
