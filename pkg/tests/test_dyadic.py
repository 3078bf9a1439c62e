from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from topdown_dt.dyadic import ONE, ZERO, DyadicRational

dyadics = st.builds(DyadicRational, st.integers(-10**6, 10**6), st.integers(0, 40))


class TestCanonicalForm:
    """Numerator is odd, or zero with exponent 0."""

    def test_reduces_even_numerators(self):
        d = DyadicRational(12, 4)
        assert (d.numerator, d.log2_denominator) == (3, 2)

    def test_zero(self):
        d = DyadicRational(0, 9)
        assert (d.numerator, d.log2_denominator) == (0, 0)
        assert d == ZERO

    def test_negative_exponent_scales_up(self):
        assert DyadicRational(3, -2) == 12

    @given(dyadics)
    def test_invariant(self, d):
        assert d.numerator == 0 and d.log2_denominator == 0 or d.numerator % 2 == 1 or d.log2_denominator == 0

    def test_immutable(self):
        with pytest.raises(AttributeError):
            ONE.numerator = 2


class TestArithmetic:
    @given(dyadics, dyadics)
    def test_matches_fraction(self, a, b):
        fa, fb = a.to_fraction(), b.to_fraction()
        assert (a + b).to_fraction() == fa + fb
        assert (a - b).to_fraction() == fa - fb
        assert (a * b).to_fraction() == fa * fb
        assert (a < b) == (fa < fb)
        assert (a == b) == (fa == fb)

    @given(dyadics, st.integers(-20, 20))
    def test_scale(self, a, k):
        assert a.scale(k).to_fraction() == a.to_fraction() * Fraction(2) ** k

    def test_mixed_with_fraction(self):
        assert DyadicRational(1, 2) + Fraction(1, 4) == Fraction(1, 2)
        assert DyadicRational(1, 2) < Fraction(1, 3)
        assert DyadicRational(1, 3) <= Fraction(1, 8)
        assert DyadicRational(1, 2) != Fraction(1, 3)

    def test_non_dyadic_coercion_rejected(self):
        with pytest.raises(ValueError):
            DyadicRational.coerce(Fraction(1, 3))

    def test_float_comparisons(self):
        assert DyadicRational(1, 1) == 0.5
        assert DyadicRational(1, 1) < 0.6

    @given(dyadics)
    def test_hash_matches_fraction(self, a):
        assert hash(a) == hash(a.to_fraction())

    def test_parse_and_str(self):
        assert str(DyadicRational.parse("3/8")) == "3/8"
        assert str(DyadicRational(5)) == "5"
