from fractions import Fraction
from typing import Callable, Iterable, Optional, Type, Union

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"


class ParseException(Exception):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None) -> None:
        if line is not None:
            message = "{message} (line {line}, column {column})".format(message=message, line=line, column=column)
        super().__init__(message)
        self.line = line
        self.column = column


class SortException(Exception):
    pass


class DistributionException(Exception):
    pass


class GeometryException(Exception):
    pass


class PLTSException(Exception):
    pass


class FormulaException(Exception):
    pass


class CertificateException(Exception):
    pass


class ResolutionException(Exception):
    pass


class DerivationException(Exception):
    def __init__(self, message: str, location: Optional[str] = None) -> None:
        if location:
            message = "{message} at {location}".format(message=message, location=location)
        super().__init__(message)
        self.location = location


class InvariantViolation(Exception):
    pass


Rational = Union[Fraction, int, str]


def to_fraction(value: Rational) -> Fraction:
    """
    Converts ints, fractions and strings such as ``"1/3"`` or ``"0.25"`` into an exact ``Fraction``.  Floats are
    refused, they cannot be represented exactly.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError("exact rational expected, got {!r}".format(value))
    return Fraction(value)


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return "{}/{}".format(value.numerator, value.denominator)


def check_probability(p: Fraction, exc: Type[Exception] = DistributionException, closed: bool = False) -> Fraction:
    lower_ok = p >= 0 if closed else p > 0
    upper_ok = p <= 1 if closed else p < 1
    if not (lower_ok and upper_ok):
        raise exc("probability {} outside {}".format(format_fraction(p), "[0,1]" if closed else "(0,1)"))
    return p


def fraction_sum(values: Iterable[Fraction]) -> Fraction:
    return sum(values, Fraction(0))


def builder(func: Callable) -> Callable:
    """
    Decorator for wrapper "builder" functions.  These are functions on classes such as certificates which add to the
    instance and return self.  To make the build functions immutable, this decorator copies the current instance
    before applying the inner function.  The inner function does not need to return self.
    """
    import copy

    def _copy(self, *args, **kwargs):
        self_copy = copy.copy(self) if getattr(self, "immutable", True) else self
        result = func(self_copy, *args, **kwargs)

        if result is None:
            return self_copy

        return result

    return _copy
