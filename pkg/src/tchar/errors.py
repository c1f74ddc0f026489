"""Exception hierarchy shared across the package."""

from __future__ import annotations


class TcharError(Exception):
    """Base class for all errors raised by :mod:`tchar`."""


class DomainError(TcharError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(TcharError, ArithmeticError):
    """Adaptive quadrature exhausted its evaluation budget."""

    def __init__(self, message: str, value: float = float("nan"), error_estimate: float = float("inf")):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class BracketError(TcharError, ValueError):
    """Bracket expansion failed to straddle the target value."""


class ConvergenceError(TcharError, ArithmeticError):
    """An iterative solver hit its iteration cap."""


class MomentError(TcharError, ValueError):
    """The requested moment does not exist for the distribution."""


class DegenerateConditioningError(TcharError, ValueError):
    """The conditioning value sits where F(x) is numerically 0 or 1."""


class RankError(TcharError, ValueError):
    """Invalid combination of order-statistic ranks."""


class InsufficientDataError(TcharError, ValueError):
    """A Monte Carlo bin holds too few points to estimate a standard error."""
