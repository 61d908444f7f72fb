"""Exact rational scalar layer.

All internal arithmetic is exact. gmpy2.mpq is used when available
(noticeably faster for LP pivoting); fractions.Fraction otherwise.
Values parsed from floats are converted to their exact binary rational.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

try:
    from gmpy2 import mpq as _mpq

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    _mpq = None
    _HAVE_GMPY2 = False

Scalar = Union[int, Fraction, "mpq"]


def rat(value) -> Scalar:
    """Convert int/str/Fraction/float to an exact rational.

    Strings accept "p/q", decimal ("2.5") and integer forms. Floats are
    converted exactly (binary expansion), not via repr rounding.
    """
    if isinstance(value, str):
        try:
            f = Fraction(value)
        except ValueError:
            f = Fraction(float(value))  # scientific notation, e.g. "1e-9"
    elif isinstance(value, float):
        f = Fraction(value)
    elif isinstance(value, (int, Fraction)):
        f = Fraction(value)
    else:
        # already an mpq (or mpz); normalize through Fraction-compatible path
        if _HAVE_GMPY2:
            return _mpq(value)
        f = Fraction(value)
    if _HAVE_GMPY2:
        return _mpq(f.numerator, f.denominator)
    return f


ZERO = rat(0)
ONE = rat(1)
TWO = rat(2)


def rat_str(value: Scalar) -> str:
    """Canonical string form: "p/q" or "p"."""
    return str(rat(value))


def as_float(value: Scalar) -> float:
    return float(Fraction(str(rat(value))))


def format_scalar(value: Scalar, mode: str = "exact") -> str:
    if mode == "float":
        return repr(as_float(value))
    return rat_str(value)
