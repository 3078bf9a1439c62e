from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bf_disagreement, bf_influence, bf_mean, bf_table, bf_value, truth_tables
from topdown_dt import boolfn as B
from topdown_dt.boolfn import FamilyParams, Restriction, TruthTable
from topdown_dt.dyadic import DyadicRational


class TestTruthTable:
    def test_storage_bound(self):
        with pytest.raises(ValueError):
            TruthTable(2, 1 << 4)

    def test_arity_cap(self):
        with pytest.raises(ValueError):
            B.constant(1, B.MAX_N + 1)

    @given(truth_tables(max_n=8))
    def test_file_round_trip(self, f):
        assert B.loads_table(B.dumps_table(f)) == f

    def test_file_format_little_endian_digits(self):
        # f(x) = +1 only at x = 1: bit 1 of digit 0 -> "2"
        f = TruthTable(2, 0b0010)
        assert B.dumps_table(f).split() == ["n=2", "2"]
        g = TruthTable(3, 1 << 4)  # digit 1 holds bits 4..7
        assert B.dumps_table(g).split()[1] == "01"

    def test_bad_file(self):
        with pytest.raises(ValueError):
            B.loads_table("n=2\nzz\n")
        with pytest.raises(ValueError):
            B.loads_table("2\n0\n")


class TestEvaluate:
    def test_parity_even_is_minus(self):
        p = B.parity(2)
        assert B.evaluate(p, (0, 0)) == -1
        assert B.evaluate(p, (1, 0)) == 1

    def test_constant(self):
        c = B.constant(1, 3)
        assert all(B.evaluate(c, x) == 1 for x in range(8))

    def test_coordinate_one_is_low_bit(self):
        d = B.dictator(3, 1)
        assert B.evaluate(d, (1, 0, 0)) == 1
        assert B.evaluate(d, 1) == 1
        assert B.evaluate(d, (0, 1, 1)) == -1

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            B.evaluate(B.parity(2), (1, 0, 0))


class TestRestrict:
    def test_parity_flips(self):
        r = B.restrict(B.parity(2), Restriction(((1, 1),)))
        assert r.n == 1
        assert B.evaluate(r, (0,)) == 1 and B.evaluate(r, (1,)) == -1

    def test_empty_is_identity(self):
        f = B.majority(3)
        assert B.restrict(f, Restriction()) == f

    def test_and_gives_identity(self, and2):
        r = B.restrict(and2, Restriction(((2, 1),)))
        assert r == B.dictator(1, 1)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            B.restrict(B.parity(2), Restriction(((3, 0),)))

    def test_repeated_coordinate_rejected(self):
        with pytest.raises(ValueError):
            Restriction(((1, 0), (1, 1)))

    @given(truth_tables(min_n=2, max_n=7), st.data())
    def test_matches_pointwise(self, f, data):
        k = data.draw(st.integers(0, f.n))
        coords = data.draw(st.permutations(range(1, f.n + 1)))[:k]
        pi = Restriction(tuple((i, data.draw(st.integers(0, 1))) for i in coords))
        g = B.restrict(f, pi)
        free = [i for i in range(1, f.n + 1) if i not in pi.coords]
        assert g.n == len(free)
        for y in range(1 << g.n):
            x = 0
            for j, i in enumerate(free):
                x |= ((y >> j) & 1) << (i - 1)
            for i, b in pi:
                x |= b << (i - 1)
            assert bf_value(g, y) == bf_value(f, x)


class TestInfluence:
    def test_parity(self):
        p = B.parity(2)
        assert B.influence(p, 1) == 1 and B.influence(p, 2) == 1

    def test_exact_nonmonotone_h1(self):
        f, lay = B.family_table("exact-nonmonotone", FamilyParams(1))
        (y,) = lay.coords("y", 1)
        x1 = lay.coords("x", 1)[0]
        assert B.influence(f, y) == DyadicRational(3, 2)
        assert B.influence(f, x1) == DyadicRational(1, 2)

    def test_exact_monotone_h1(self):
        f, lay = B.family_table("exact-monotone", FamilyParams(1))
        (y,) = lay.coords("y", 1)
        assert B.influence(f, y) == Fraction(9, 16)

    @given(truth_tables(max_n=7))
    def test_matches_brute_force(self, f):
        for i in range(1, f.n + 1):
            inf = B.influence(f, i)
            assert inf.to_fraction() == bf_influence(f, i)
            assert 0 <= inf <= 1
            same = B.restrict_one(f, i, 0) == B.restrict_one(f, i, 1)
            assert (inf == 0) == same

    @given(truth_tables(max_n=8))
    def test_total_influence_is_mean_sensitivity(self, f):
        total = sum(B.sensitivity(f, x) for x in range(f.size))
        assert B.total_influence(f) == DyadicRational(total, f.n)

    def test_majority3_total(self):
        assert B.total_influence(B.majority(3)) == Fraction(3, 2)


class TestStatistics:
    def test_variance_examples(self):
        assert B.variance(B.constant(-1, 4)) == 0
        for k in (1, 2, 5):
            assert B.variance(B.parity(k)) == 1

    @given(truth_tables(max_n=8))
    def test_mean_and_variance(self, f):
        mu = bf_mean(f)
        assert B.mean(f).to_fraction() == mu
        assert B.variance(f).to_fraction() == 1 - mu * mu

    @given(truth_tables(max_n=8))
    def test_error_relations(self, f):
        e = B.error_pm1(f)
        assert e <= B.total_influence(f)
        var = B.variance(f).to_fraction()
        assert e.to_fraction() <= var
        # with q = error, Var = 4q(1-q), so Var/4 <= q <= Var/2 is the tight form
        assert var / 4 <= e.to_fraction() <= var / 2

    def test_half_variance_lower_bound_fails_on_and(self, and2):
        """The lower bound Var/2 <= error(f, +-1) is false for unbalanced f."""
        assert B.variance(and2) == Fraction(3, 4)
        assert B.error_pm1(and2) == Fraction(1, 4)
        assert B.error_pm1(and2) < B.variance(and2).to_fraction() / 2

    def test_error_examples(self, and2):
        p = B.parity(2)
        assert B.error(p, p) == 0
        assert B.error(p, B.constant(1, 2)) == Fraction(1, 2)
        assert B.error_pm1(and2) == Fraction(1, 4)

    def test_error_arity_mismatch(self):
        with pytest.raises(ValueError):
            B.error(B.parity(2), B.parity(3))

    @given(truth_tables(max_n=6), truth_tables(max_n=6))
    def test_error_brute_force(self, f, g):
        if f.n == g.n:
            assert B.error(f, g).to_fraction() == bf_disagreement(f, g)


class TestCorrelation:
    def test_examples(self, and2):
        assert B.correlation(B.parity(2), 1) == 0
        assert B.correlation(and2, 1) == Fraction(1, 2) == B.influence(and2, 1)
        assert B.correlation(B.constant(1, 3), 2) == 0

    @given(st.integers(1, 8), st.integers(0, 2**32))
    def test_monotone_equals_influence(self, n, seed):
        f = B.random_monotone_function(n, seed)
        assert B.is_monotone(f)
        assert B.correlations(f) == B.influences(f)

    @given(truth_tables(max_n=6))
    def test_formula(self, f):
        for i in range(1, f.n + 1):
            e = sum(bf_value(f, x) * ((x >> (i - 1)) & 1) for x in range(f.size))
            assert B.correlation(f, i).to_fraction() == 2 * Fraction(e, f.size) - bf_mean(f)


class TestMonotone:
    def test_examples(self):
        assert B.is_monotone(B.majority(3))
        assert not B.is_monotone(B.parity(2))
        assert B.is_monotone(B.family_exact_monotone(2))

    @given(truth_tables(max_n=6))
    def test_brute_force(self, f):
        expected = all(
            bf_value(f, x) <= bf_value(f, x | (1 << j)) for x in range(f.size) for j in range(f.n)
        )
        assert B.is_monotone(f) == expected


class TestGenerators:
    def test_threshold(self):
        t = B.threshold(3, 1)
        assert B.evaluate(t, (1, 0, 0)) == 1
        assert B.evaluate(t, (1, 1, 0)) == -1

    def test_majority_is_strict(self):
        m = B.majority(4)
        assert B.evaluate(m, (1, 1, 0, 0)) == -1
        assert B.evaluate(m, (1, 1, 1, 0)) == 1

    def test_tribes4(self):
        assert B.tribes_width(4) == 1
        f = B.tribes(4)
        assert f.ones == 15

    @pytest.mark.parametrize("r", range(1, 20))
    def test_tribes_width_rule(self, r):
        w = B.tribes_width(r)
        ok = lambda w: (1 - Fraction(1, 2**w)) ** (r // w) <= Fraction(1, 2)
        assert ok(w)
        assert not any(ok(v) for v in range(w + 1, r + 1))

    @pytest.mark.parametrize("ell", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("delta", [Fraction(1, 10), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
    def test_biased_tribes_width_is_closest(self, ell, delta):
        w = B.biased_tribes_width(ell, delta)
        f = B.tribes_biased(ell, delta)
        gap = abs(Fraction(f.ones, f.size) - delta)
        for v in range(1, ell + 1):
            acc = B.tribes_acceptance(v, ell // v).to_fraction()
            assert gap <= abs(acc - delta)
            if abs(acc - delta) == gap:
                assert w <= v

    def test_biased_tribes_complement_side(self):
        f = B.tribes_biased(4, Fraction(1, 4), side="complement")
        g = B.tribes_biased(4, Fraction(1, 4))
        assert f.ones + g.ones == f.size or f.ones != g.ones

    def test_delta_out_of_range(self):
        with pytest.raises(ValueError):
            B.tribes_biased(3, 1)

    def test_family_base_case_is_z(self):
        f = B.family_exact_nonmonotone(0)
        assert f == B.dictator(1, 1)

    def test_family_overflow(self):
        with pytest.raises(ValueError):
            B.family_table("exact-monotone", FamilyParams(6))

    @pytest.mark.parametrize(
        "family,p",
        [
            ("exact-nonmonotone", FamilyParams(2)),
            ("exact-nonmonotone", FamilyParams(3)),
            ("exact-monotone", FamilyParams(2)),
            ("approx-nonmonotone", FamilyParams(1, ell=2, k=2, r=4)),
            ("approx-nonmonotone", FamilyParams(2, ell=3, k=1, r=3)),
            ("approx-monotone", FamilyParams(1, ell=2, k=1, r=2, delta=Fraction(3, 4))),
            ("approx-monotone", FamilyParams(2, ell=2, k=3, r=3, delta=Fraction(1, 4))),
        ],
    )
    def test_families_match_reference_evaluator(self, family, p):
        f, lay = B.family_table(family, p)
        assert lay.n == f.n == B.family_n(family, p)
        for x in range(f.size):
            pt = B.point_bits(x, f.n)
            assert bf_value(f, x) == B.reference_eval(family, p, pt)

    def test_monotone_families_are_monotone(self):
        assert B.is_monotone(B.family_approx_monotone(FamilyParams(2, ell=2, k=1, r=2, delta=Fraction(3, 4))))

    def test_layout_order(self):
        lay = B.family_layout("exact-nonmonotone", FamilyParams(2))
        names = [b.name for b in lay.blocks]
        assert names == ["x(2)", "x(1)", "y(2)", "y(1)", "z"]
        assert lay.z_coords == frozenset({7})

    def test_random_tree_function_self_consistent(self):
        from topdown_dt.dtree import random_tree, to_truth_table

        f = B.random_tree_function(8, 16, 5)
        T = random_tree(8, 16, 5)
        assert to_truth_table(T, 8) == f

    def test_influence_order_preserved_under_restrictions(self):
        """Inner-block influence order agrees between the block function and the composite."""
        p = FamilyParams(2, ell=3, k=2, r=3)
        f, lay = B.family_table("approx-nonmonotone", p)
        rng = np.random.default_rng(0)
        outer = lay.coords("x", 2) + lay.coords("y", 2)
        tribes_z = B.tribes(p.r)
        zc = sorted(lay.z_coords)
        for _ in range(100):
            k = int(rng.integers(0, len(outer) + 1))
            fixed = rng.choice(outer, size=k, replace=False)
            pi = Restriction(tuple((int(i), int(rng.integers(0, 2))) for i in fixed))
            g = B.restrict(f, pi)
            free = [i for i in range(1, f.n + 1) if i not in pi.coords]
            local = {i: j + 1 for j, i in enumerate(free)}
            for a in range(len(zc)):
                for b in range(len(zc)):
                    ia, ib = B.influence(tribes_z, a + 1), B.influence(tribes_z, b + 1)
                    ga, gb = B.influence(g, local[zc[a]]), B.influence(g, local[zc[b]])
                    if ia > ib:
                        assert ga >= gb
