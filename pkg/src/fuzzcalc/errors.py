"""Exception hierarchy shared by all fuzzcalc modules."""

from __future__ import annotations


class FuzzyCalcError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(FuzzyCalcError, ValueError):
    """A constructor or operation received out-of-contract parameters."""


class RangeError(FuzzyCalcError, ValueError):
    """A membership level or query point fell outside its admissible range."""


class ShapeFunctionError(FuzzyCalcError, ValueError):
    """A shape function violated monotonicity or its boundary values."""


class UnsupportedFamilyError(FuzzyCalcError, TypeError):
    """A fuzzification family cannot provide what was asked of it."""


class EvaluationError(FuzzyCalcError, ArithmeticError):
    """Expression evaluation produced a non-finite result.

    Carries the source span of the offending node when the expression
    was built by the parser.
    """

    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.span = span


class NotDifferentiableError(FuzzyCalcError):
    """A derivative was requested where the first-order verdict is negative.

    The ``result`` attribute holds the first-order outcome whose witnesses
    explain the failure.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result
