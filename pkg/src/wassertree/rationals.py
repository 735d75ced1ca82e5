"""Helpers for exact rational values and their wire format.

All quantities in this package (edge lengths, masses, flows, costs,
times) are `fractions.Fraction` instances.  On the wire they travel as
strings like ``"3/4"`` or ``"-2"``; floats are rejected so that no
rounding can sneak into a computation.
"""

from __future__ import annotations

from decimal import Decimal, ROUND_HALF_EVEN
from fractions import Fraction

from .errors import ParseError

__all__ = ["parse_fraction", "format_fraction", "decimal_string", "INFINITY"]


def parse_fraction(value) -> Fraction:
    """Parse an exact rational from an int, a Fraction or a "p/q" string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParseError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {value!r}") from exc
    raise ParseError(f"not a rational: {value!r} (floats are not accepted)")


def format_fraction(value: Fraction) -> str:
    """Render a Fraction the way ``parse_fraction`` reads it back."""
    return str(Fraction(value))


def decimal_string(value: Fraction, places: int) -> str:
    """Deterministic decimal rendering with ``places`` digits (half-even)."""
    quantum = Decimal(1).scaleb(-places)
    dec = Decimal(value.numerator) / Decimal(value.denominator)
    return str(dec.quantize(quantum, rounding=ROUND_HALF_EVEN))


class _Infinity:
    """Sentinel for the infinite Gromov product of an end with itself.

    Deliberately supports no arithmetic: it must never be mixed into a
    rational computation.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()
