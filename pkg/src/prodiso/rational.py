"""Exact rational scalars.

``fractions.Fraction`` already keeps values in lowest terms with a positive
denominator, so it is used directly as the distance type.
"""

from fractions import Fraction
from math import gcd, lcm

from .errors import ParseError

Rat = Fraction


def to_rat(value):
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Strings must already be in lowest terms; ``"2/4"`` is rejected so that
    serialized documents have a single canonical spelling per value.
    """
    if isinstance(value, bool):
        raise ParseError(f"boolean is not a distance: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        num, sep, den = text.partition("/")
        try:
            n = int(num)
            d = int(den) if sep else 1
        except ValueError:
            raise ParseError(f"not a rational: {value!r}") from None
        if d == 0:
            raise ParseError(f"zero denominator: {value!r}")
        if d < 0:
            raise ParseError(f"denominator must be positive: {value!r}")
        if gcd(n, d) != 1 and sep:
            raise ParseError(f"not in lowest terms: {value!r}")
        return Fraction(n, d)
    raise ParseError(f"unsupported distance entry {value!r}")


def format_rat(value):
    """Serialize a Fraction: bare int when integral, else ``"p/q"``."""
    value = Fraction(value)
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


def common_scale(values):
    """Least common multiple of the denominators of ``values``."""
    scale = 1
    for v in values:
        scale = lcm(scale, Fraction(v).denominator)
    return scale


def rat_gcd(values):
    """Largest rational g such that every value is an integer multiple of g."""
    values = [Fraction(v) for v in values if v != 0]
    if not values:
        return Fraction(0)
    scale = common_scale(values)
    g = 0
    for v in values:
        g = gcd(g, int(v * scale))
    return Fraction(g, scale)


def divides(step, value):
    """True when ``value`` is an integer multiple of ``step`` (step > 0)."""
    return (Fraction(value) / Fraction(step)).denominator == 1
