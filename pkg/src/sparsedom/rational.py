"""Exact rational arithmetic helpers shared across the toolkit.

All geometric coordinates and step-function values are ``fractions.Fraction``
instances.  Serialized form is the string ``"num/den"`` (always with an
explicit denominator); parsing additionally accepts plain integers and
decimal strings, both converted exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
THIRD = Fraction(1, 3)


def rat(value) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Accepts Fraction, int, "num/den" strings, decimal strings and floats.
    Floats are converted exactly (no decimal rounding), so a float input
    denotes the dyadic rational it actually stores.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rat_str(q) -> str:
    """Serialize a rational as ``"num/den"`` (denominator always explicit)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rat_floor(q: Fraction) -> int:
    return q.numerator // q.denominator


def rat_ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def floor_log2(q: Fraction) -> int:
    """Largest integer t with 2**t <= q, computed exactly.  Requires q > 0."""
    if q <= 0:
        raise ValueError("floor_log2 requires a positive rational")
    n, d = q.numerator, q.denominator
    t = n.bit_length() - d.bit_length()
    # bit_length gives t within 1; correct exactly.
    while not _pow2_le(t, n, d):
        t -= 1
    while _pow2_le(t + 1, n, d):
        t += 1
    return t


def _pow2_le(t: int, n: int, d: int) -> bool:
    """Exact test 2**t <= n/d for positive n, d."""
    if t >= 0:
        return (d << t) <= n
    return d <= (n << (-t))


def pow2(t: int) -> Fraction:
    """2**t as an exact Fraction, for any integer t."""
    if t >= 0:
        return Fraction(1 << t)
    return Fraction(1, 1 << (-t))


def parse_scalar(text: str) -> Fraction:
    """Parse a scalar from CSV/CLI input: "num/den", integer or decimal."""
    return Fraction(text.strip())


def float_of(q) -> float:
    return q.numerator / q.denominator if isinstance(q, Fraction) else float(q)


def isqrt_upper(q: Fraction) -> float:
    """Float square root of a nonnegative rational (for reporting only)."""
    if q < 0:
        raise ValueError("negative radicand")
    return math.sqrt(q.numerator / q.denominator)
