import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bf_disagreement, bf_min_tree_size, bf_tree_value, bf_value, trees, truth_tables
from topdown_dt import boolfn as B
from topdown_dt import dtree as D
from topdown_dt.boolfn import FamilyParams, Restriction
from topdown_dt.dtree import BareTree, Leaf, Node


def complete_tree(vars_, label_fn=lambda path: 1):
    def rec(vs, path):
        if not vs:
            return Leaf(label_fn(path))
        return Node(vs[0], rec(vs[1:], path + (0,)), rec(vs[1:], path + (1,)))

    return rec(list(vars_), ())


class TestConstruction:
    def test_bad_label(self):
        with pytest.raises(ValueError):
            Leaf(0)

    def test_bad_var(self):
        with pytest.raises(ValueError):
            Node(0, Leaf(1), Leaf(-1))

    def test_repeated_var_rejected(self):
        t = Node(1, Node(1, Leaf(1), Leaf(-1)), Leaf(1))
        with pytest.raises(ValueError):
            D.validate(t)

    def test_var_beyond_n(self):
        with pytest.raises(ValueError):
            D.validate(Node(4, Leaf(1), Leaf(-1)), 3)


class TestStats:
    def test_single_leaf(self):
        s = D.stats(Leaf(1))
        assert (s.size, s.depth, s.average_depth) == (1, 0, 0)

    @pytest.mark.parametrize("d", [1, 2, 5])
    def test_complete_tree(self, d):
        s = D.stats(complete_tree(range(1, d + 1)))
        assert s.size == 2**d and s.depth == d and s.average_depth == d

    def test_optimal_parity_tree(self):
        t = D.optimal_tree(B.parity(2))
        assert (D.size(t), D.depth(t)) == (4, 2)

    @given(st.integers(1, 10), st.integers(1, 40), st.integers(0, 2**30))
    def test_average_depth_bounds(self, n, s, seed):
        t = D.random_tree(n, s, seed)
        st_ = D.stats(t)
        assert st_.average_depth <= st_.depth
        assert float(st_.average_depth) <= math.log2(st_.size) + 1e-9
        total = sum(Fraction(d, 2**d) for d in (len(p) for p, _ in D.iter_leaves(t)))
        assert st_.average_depth.to_fraction() == total


class TestSemantics:
    @given(st.data())
    def test_eval_and_table(self, data):
        n = data.draw(st.integers(1, 7))
        t = data.draw(trees(n))
        f = D.to_truth_table(t, n)
        for x in range(1 << n):
            assert bf_value(f, x) == bf_tree_value(t, x) == D.eval_tree(t, x, n)

    def test_eval_out_of_range(self):
        with pytest.raises(ValueError):
            D.eval_tree(Node(3, Leaf(1), Leaf(-1)), (0, 1), 2)


class TestCompletion:
    def test_and_root(self, and2):
        bare = BareTree.from_tree(Leaf(1))
        t = D.f_completion(bare, and2)
        assert t == Leaf(-1)
        assert D.completion_error(bare, and2) == Fraction(1, 4)

    def test_parity_tie_goes_plus(self):
        bare = BareTree.from_tree(Leaf(1))
        assert D.f_completion(bare, B.parity(2)) == Leaf(1)
        assert D.completion_error(bare, B.parity(2)) == Fraction(1, 2)

    def test_full_tree_is_exact(self):
        f = B.majority(3)
        bare = BareTree.complete(3)
        assert D.completion_error(bare, f) == 0
        assert D.to_truth_table(D.f_completion(bare, f), 3) == f

    def test_minimality_under_label_flips(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(1, 11))
            f = B.random_tree_function(n, int(rng.integers(1, 20)), rng)
            bare = BareTree.from_tree(D.random_tree(n, int(rng.integers(1, 12)), rng))
            t = D.f_completion(bare, f)
            base = D.completion_error(bare, f)
            leaves = list(D.iter_leaves(t))
            for k in range(len(leaves)):
                labels = [lab for _, lab in leaves]
                labels[k] = -labels[k]
                it = iter(labels)
                g = D.to_truth_table(bare.labeled(lambda leaf: next(it)), n)
                assert B.error(g, f) >= base

    @given(truth_tables(max_n=7), st.integers(1, 12), st.integers(0, 2**20))
    def test_error_at_most_cost(self, f, s, seed):
        bare = BareTree.from_tree(D.random_tree(f.n, s, seed))
        assert D.completion_error(bare, f) <= D.cost(bare, f)


class TestCost:
    def test_root_is_total_influence(self):
        f = B.majority(3)
        assert D.cost(BareTree.from_tree(Leaf(1)), f) == B.total_influence(f)

    def test_full_tree_zero(self):
        assert D.cost(BareTree.complete(4), B.parity(4)) == 0

    @given(truth_tables(min_n=1, max_n=7), st.integers(1, 10), st.integers(0, 2**20), st.data())
    def test_split_decrement_exact(self, f, s, seed, data):
        bare = BareTree.from_tree(D.random_tree(f.n, s, seed))
        open_leaves = [lf for lf in bare.leaves() if len(lf.path) < f.n]
        if not open_leaves:
            return
        leaf = data.draw(st.sampled_from(open_leaves))
        free = [i for i in range(1, f.n + 1) if i not in leaf.path.coords]
        i = data.draw(st.sampled_from(free))
        sub = B.restrict(f, leaf.path)
        local = free.index(i) + 1
        before = D.cost(bare, f)
        after = D.cost(bare.split(leaf.path, i), f)
        assert after == before - B.influence(sub, local).scale(-len(leaf.path))


class TestOracle:
    def test_examples(self, and2):
        assert D.optimal_size(B.constant(1, 4)) == 1
        assert D.optimal_size(B.parity(2)) == 4
        assert D.optimal_size(and2) == 3
        assert D.optimal_depth(B.parity(3)) == 3

    @given(truth_tables(min_n=1, max_n=4))
    def test_brute_force(self, f):
        assert D.optimal_size(f) == bf_min_tree_size(f)

    @given(st.integers(1, 9), st.integers(1, 24), st.integers(0, 2**30))
    def test_at_most_generating_size(self, n, s, seed):
        t = D.random_tree(n, s, seed)
        f = D.to_truth_table(t, n)
        opt = D.optimal_tree(f)
        assert D.optimal_size(f) <= D.size(t)
        assert D.size(opt) == D.optimal_size(f)
        assert D.to_truth_table(opt, n) == f

    @pytest.mark.parametrize("h", [1, 2, 3])
    def test_natural_nonmonotone_construction_is_optimal(self, h):
        f = B.family_exact_nonmonotone(h)
        assert D.optimal_size(f) == D.size(D.natural_tree("exact-nonmonotone", FamilyParams(h))) == 4 * h + 2

    def test_too_large(self):
        with pytest.raises(ValueError):
            D.optimal_size(B.constant(1, 17))


class TestTotalInfluenceBounds:
    """Inf <= log2 s, Inf <= Var log2(4s/Var), OSSS, with s from the oracle."""

    def test_corpus(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            n = int(rng.integers(1, 13))
            f = D.to_truth_table(D.random_tree(n, int(rng.integers(1, 33)), rng), n)
            s = D.optimal_size(f)
            inf = float(B.total_influence(f))
            var = float(B.variance(f))
            assert inf <= math.log2(s) + 1e-9
            if var > 0:
                assert inf <= var * math.log2(4 * s / var) + 1e-9
                assert max(float(x) for x in B.influences(f)) >= var / math.log2(s) - 1e-9

    def test_monotone_sqrt_bound(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            f = B.random_monotone_function(int(rng.integers(1, 11)), rng)
            s = D.optimal_size(f)
            if s > 1:
                assert float(B.total_influence(f)) <= math.sqrt(math.log2(s)) + 1e-9


class TestPruning:
    def test_examples(self):
        t = D.random_tree(6, 12, 0)
        assert D.is_pruning_of(t, t)
        assert D.is_pruning_of(Leaf(-1), t)
        a = Node(1, Leaf(1), Leaf(-1))
        b = Node(2, Leaf(1), Leaf(-1))
        assert not D.is_pruning_of(a, b)

    def test_subtree_prefix(self):
        big = Node(1, Node(2, Leaf(1), Leaf(-1)), Node(3, Leaf(1), Leaf(-1)))
        small = Node(1, Leaf(1), Node(3, Leaf(-1), Leaf(-1)))
        assert D.is_pruning_of(small, big)
        assert not D.is_pruning_of(big, small)

    def test_bare_trees(self):
        big = BareTree.complete(3)
        small = BareTree.from_tree(Node(1, Leaf(1), Leaf(1)))
        assert D.is_pruning_of(small, big)


class TestSerialization:
    def test_leaf(self):
        assert json.loads(D.serialize(Leaf(1))) == {"leaf": 1}

    def test_round_trip(self):
        t = D.random_tree(10, 50, 7)
        assert D.size(t) == 50
        assert D.deserialize(D.serialize(t)) == t
        assert D.serialize(D.deserialize(D.serialize(t))) == D.serialize(t)

    def test_zero_var(self):
        with pytest.raises(ValueError, match=r"\$"):
            D.deserialize(b'{"var":0,"0":{"leaf":1},"1":{"leaf":-1}}')

    def test_positional_diagnostic(self):
        with pytest.raises(ValueError, match=r"\$\.1"):
            D.deserialize(b'{"var":1,"0":{"leaf":1},"1":{"leaf":2}}')

    def test_not_json(self):
        with pytest.raises(ValueError):
            D.deserialize(b"{oops")
