"""Exact rational helpers and decimal rendering.

All exponent arithmetic runs on :class:`fractions.Fraction`, which already
normalizes to lowest terms with a positive denominator.  This module adds
the strict decimal parser and the directed-rounding renderers used for
every displayed exponent.
"""

import re
from fractions import Fraction

Rational = Fraction

_DECIMAL_RE = re.compile(r"^\s*([+-]?)(\d+)(?:\.(\d*))?\s*$|^\s*([+-]?)\.(\d+)\s*$")


def parse_decimal(text: str) -> Fraction:
    """Parse a finite decimal string such as ``"-0.1991466"`` exactly.

    Exponent notation, fractions and non-finite values are rejected.
    """
    if not isinstance(text, str):
        raise TypeError(f"expected str, got {type(text).__name__}")
    m = _DECIMAL_RE.match(text)
    if m is None:
        raise ValueError(f"malformed decimal: {text!r}")
    if m.group(2) is not None:
        sign, whole, frac = m.group(1), m.group(2), m.group(3) or ""
    else:
        sign, whole, frac = m.group(4), "0", m.group(5)
    value = Fraction(int(whole + frac), 10 ** len(frac))
    return -value if sign == "-" else value


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and decimal or ``num/den`` strings to a Fraction.

    Floats are refused: they would smuggle binary rounding into derivations.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if "/" in value:
            return parse_fraction(value)
        return parse_decimal(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def parse_fraction(text: str) -> Fraction:
    num, sep, den = text.strip().partition("/")
    if not sep:
        return Fraction(int(num))
    try:
        n, d = int(num), int(den)
    except ValueError:
        raise ValueError(f"malformed fraction: {text!r}") from None
    if d == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return Fraction(n, d)


def format_fraction(x: Fraction) -> str:
    """``num/den`` form, used wherever floats would lose information."""
    return f"{x.numerator}/{x.denominator}"


def _render(scaled: int, places: int) -> str:
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def ceil_to(x: Fraction, places: int) -> Fraction:
    """Smallest multiple of ``10**-places`` that is >= x."""
    if places < 0:
        raise ValueError("places must be nonnegative")
    scale = 10**places
    return Fraction(-((-x.numerator * scale) // x.denominator), scale)


def floor_to(x: Fraction, places: int) -> Fraction:
    if places < 0:
        raise ValueError("places must be nonnegative")
    scale = 10**places
    return Fraction((x.numerator * scale) // x.denominator, scale)


def render_ceiling(x: Fraction, places: int) -> str:
    """Render x rounded up in the last displayed place.

    >>> render_ceiling(Fraction(1, 3), 4)
    '0.3334'
    """
    x = as_rational(x)
    return _render(int(ceil_to(x, places) * 10**places), places)


def render_floor(x: Fraction, places: int) -> str:
    """Rounded-down counterpart of :func:`render_ceiling`; display only."""
    x = as_rational(x)
    return _render(int(floor_to(x, places) * 10**places), places)
