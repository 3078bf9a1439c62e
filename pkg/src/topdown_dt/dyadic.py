"""Exact dyadic rationals: ``numerator / 2**log2_denominator``.

Every probability over the uniform cube {0,1}^n is of this form, so all
influence, variance and error computations stay exact.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


class DyadicRational:
    """An exact number ``numerator * 2**-log2_denominator`` in canonical form.

    Canonical form keeps the numerator odd (or zero, with exponent 0), so
    structural equality coincides with numeric equality.
    """

    __slots__ = ("numerator", "log2_denominator")

    def __init__(self, numerator: int, log2_denominator: int = 0):
        if log2_denominator < 0:
            numerator <<= -log2_denominator
            log2_denominator = 0
        if numerator == 0:
            log2_denominator = 0
        else:
            tz = (numerator & -numerator).bit_length() - 1
            tz = min(tz, log2_denominator)
            numerator >>= tz
            log2_denominator -= tz
        object.__setattr__(self, "numerator", int(numerator))
        object.__setattr__(self, "log2_denominator", int(log2_denominator))

    def __setattr__(self, name, value):
        raise AttributeError("DyadicRational is immutable")

    @classmethod
    def coerce(cls, value) -> "DyadicRational":
        if isinstance(value, DyadicRational):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, Rational):
            den = value.denominator
            if den & (den - 1):
                raise ValueError(f"{value} is not dyadic")
            return cls(value.numerator, den.bit_length() - 1)
        raise TypeError(f"cannot convert {type(value).__name__} to DyadicRational")

    @property
    def denominator(self) -> int:
        return 1 << self.log2_denominator

    def _aligned(self, other: "DyadicRational") -> tuple[int, int, int]:
        k = max(self.log2_denominator, other.log2_denominator)
        a = self.numerator << (k - self.log2_denominator)
        b = other.numerator << (k - other.log2_denominator)
        return a, b, k

    def __add__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, k = self._aligned(other)
        return DyadicRational(a + b, k)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, k = self._aligned(other)
        return DyadicRational(a - b, k)

    def __rsub__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return other - self

    def __mul__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return DyadicRational(
            self.numerator * other.numerator,
            self.log2_denominator + other.log2_denominator,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return DyadicRational(-self.numerator, self.log2_denominator)

    def __abs__(self):
        return DyadicRational(abs(self.numerator), self.log2_denominator)

    def scale(self, k: int) -> "DyadicRational":
        """Multiply by ``2**k`` (``k`` may be negative)."""
        return DyadicRational(self.numerator, self.log2_denominator - k)

    def _cmp(self, other) -> int:
        if isinstance(other, Rational) and not isinstance(other, int):
            if other.denominator & (other.denominator - 1):
                # compare exactly against a non-dyadic rational
                lhs = self.numerator * other.denominator
                rhs = other.numerator << self.log2_denominator
                return (lhs > rhs) - (lhs < rhs)
        other = DyadicRational.coerce(other)
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, float):
            return float(self) == other
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        if isinstance(other, float):
            return float(self) < other
        return self._cmp(other) < 0

    def __le__(self, other):
        if isinstance(other, float):
            return float(self) <= other
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if isinstance(other, float):
            return float(self) > other
        return self._cmp(other) > 0

    def __ge__(self, other):
        if isinstance(other, float):
            return float(self) >= other
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash(self.to_fraction())

    def __bool__(self):
        return self.numerator != 0

    def __float__(self):
        return float(self.to_fraction())

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.log2_denominator)

    def __repr__(self):
        return f"DyadicRational({self.numerator}, {self.log2_denominator})"

    def __str__(self):
        if self.log2_denominator == 0:
            return str(self.numerator)
        return f"{self.numerator}/{1 << self.log2_denominator}"

    @classmethod
    def parse(cls, text: str) -> "DyadicRational":
        return cls.coerce(Fraction(text))


ZERO = DyadicRational(0)
ONE = DyadicRational(1)
