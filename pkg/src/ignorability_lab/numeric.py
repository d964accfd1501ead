"""Mixed exact/float arithmetic helpers.

Values are ``int`` or ``Fraction`` (exact) or ``float``.  Comparisons
between two exact values are exact; anything involving a float uses the
relative tolerance ``|a - b| <= tol * max(1, |a|, |b|)``.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Iterable, Union

Number = Union[int, Fraction, float]

EQ_TOL = 1e-12
PROP_TOL = 1e-10


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def all_exact(values: Iterable) -> bool:
    return all(is_exact(v) for v in values)


def close(a: Number, b: Number, tol: float = EQ_TOL) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    a, b = float(a), float(b)
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def is_zero(x: Number, tol: float = EQ_TOL) -> bool:
    return close(x, 0, tol)


def parse_number(value) -> Number:
    """Parse a JSON probability: ``"p/q"`` or integer strings give Fractions."""
    if isinstance(value, bool):
        raise ValueError(f"booleans are not numbers: {value!r}")
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        return value
    if isinstance(value, numbers.Rational):
        return Fraction(value)
    raise ValueError(f"not a number: {value!r}")


def format_number(x: Number) -> str | float | int:
    """Inverse of :func:`parse_number` for JSON output."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    return x


def to_mode(x: Number, mode: str | None) -> Number:
    """Coerce to ``"rational"`` or ``"float"`` arithmetic; ``None`` keeps x."""
    if mode is None:
        return x
    if mode == "float":
        return float(x)
    if mode == "rational":
        if isinstance(x, float):
            # decimal reading: 0.3 means 3/10, not the nearest binary double
            return Fraction(repr(x))
        return Fraction(x)
    raise ValueError(f"unknown arithmetic mode {mode!r}")


def fsum_exact(values: Iterable[Number]) -> Number:
    """Sum preserving exactness; float inputs use ``math.fsum``."""
    values = list(values)
    if all_exact(values):
        return sum(values, Fraction(0))
    return math.fsum(float(v) for v in values)


def rel_close(a: Number, b: Number, tol: float = PROP_TOL) -> bool:
    """Purely relative comparison, for ratios that may be tiny."""
    if is_exact(a) and is_exact(b):
        return a == b
    a, b = float(a), float(b)
    return abs(a - b) <= tol * max(abs(a), abs(b))
