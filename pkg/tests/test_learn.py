import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from topdown_dt import boolfn as B
from topdown_dt import dtree as D
from topdown_dt import learn as L
from topdown_dt.boolfn import Restriction
from topdown_dt.dtree import Leaf


def exact_score(f, leaf, i):
    sub = B.restrict(f, leaf)
    local = i - sum(1 for j in leaf.coords if j < i)
    return B.influence(sub, local).scale(-len(leaf)).to_fraction()


class TestSampling:
    def test_empty(self):
        S = L.draw_examples(B.parity(2), 0, 1)
        assert len(S) == 0 and S.examples == []

    def test_replay(self):
        a = L.draw_examples(B.majority(3), 50, 7)
        b = L.draw_examples(B.majority(3), 50, 7)
        assert a.examples == b.examples

    def test_labels_match_target(self):
        f = B.random_tree_function(8, 10, 1)
        S = L.draw_examples(f, 300, 2)
        for x, y in S.examples:
            assert B.evaluate(f, x) == y

    def test_parity_mean(self):
        S = L.draw_examples(B.parity(2), 100_000, 3)
        assert abs(S.labels.mean()) <= 0.02

    def test_edges_differ_in_one_coordinate(self):
        f = B.majority(5)
        E = L.draw_edges(f, 500, 4)
        for ((x, y), (x2, y2)), i in zip(E.edges, E.dirs):
            assert x ^ x2 == 1 << (int(i) - 1)
            assert B.evaluate(f, x) == y and B.evaluate(f, x2) == y2


class TestMonotoneEstimator:
    def test_full_support_is_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(1, 9))
            f = B.random_monotone_function(n, rng)
            S = L.full_sample(f)
            for leaf in (Restriction(), Restriction(((1, 1),))):
                for i in range(1, n + 1):
                    if i in leaf.coords or len(leaf) >= n:
                        continue
                    assert L.estimate_score_monotone(S, leaf, i) == exact_score(f, leaf, i)

    def test_constant(self):
        S = L.full_sample(B.constant(1, 4))
        assert all(L.estimate_score_monotone(S, Restriction(), i) == 0 for i in range(1, 5))
        noisy = L.draw_examples(B.constant(1, 4), 20_000, 1)
        assert all(abs(L.estimate_score_monotone(noisy, Restriction(), i)) <= 0.03 for i in range(1, 5))

    def test_majority_concentration(self):
        S = L.draw_examples(B.majority(3), 100_000, 6)
        assert abs(float(L.estimate_score_monotone(S, Restriction(), 1)) - 0.5) <= 0.02


class TestEdgeEstimator:
    def test_complete_edges_root(self):
        f = B.random_tree_function(6, 10, 8)
        for i in range(1, 7):
            E = L.complete_edges(f, i)
            assert len(E) == 2**5
            assert L.estimate_score_edges(E, Restriction(), i) == B.influence(f, i).to_fraction()

    def test_parity_always_one(self):
        E = L.draw_edges(B.parity(2), 100, 1)
        assert L.estimate_score_edges(E, Restriction(), 1) == 1

    def test_and(self, and2):
        assert L.estimate_score_edges(L.complete_edges(and2, 1), Restriction(), 1) == Fraction(1, 2)

    def test_empty_part_flagged(self):
        E = L.complete_edges(B.parity(3), 1)
        assert L.estimate_score_edges(E, Restriction(), 2) is None

    @given(st.integers(2, 7), st.integers(0, 2**20), st.data())
    def test_complete_edges_at_leaves(self, n, seed, data):
        f = B.random_tree_function(n, 12, seed)
        i = data.draw(st.integers(1, n))
        others = [j for j in range(1, n + 1) if j != i]
        k = data.draw(st.integers(0, len(others)))
        leaf = Restriction(tuple((j, data.draw(st.integers(0, 1))) for j in others[:k]))
        E = L.complete_edges(f, i)
        assert L.estimate_score_edges(E, leaf, i) == exact_score(f, leaf, i)
        if leaf.coords:
            j = min(leaf.coords)
            assert L.estimate_score_edges(L.complete_edges(f, j), leaf, j) == 0


class TestSampleSizes:
    def test_formula(self):
        k, s, eps, delta = 100, 16, Fraction(1, 10), Fraction(1, 10)
        by_hand = math.ceil(12 * (k * math.log2(s) / 0.1) * (math.log2(k) + math.log2(10)))
        assert L.sample_size_monotone(k, s, eps, delta) == by_hand

    def test_monotone_in_delta(self):
        assert L.sample_size_monotone(8, 8, 0.1, 0.05) > L.sample_size_monotone(8, 8, 0.1, 0.1)

    def test_minimal_cell_positive(self):
        assert L.sample_size_monotone(1, 2, 0.5, 0.5) >= 1

    def test_edge_formula(self):
        assert L.edge_sample_size(6, 1000, Fraction(1, 10)) == math.ceil(4 * 6 * (1000 + math.log(10)))

    def test_validation_formula(self):
        assert L.validation_size(0.1, 0.1, 64) == math.ceil(32 / 0.01 * math.log(4 * 64 / 0.1))


class TestConfig:
    def test_defaults(self):
        c = L.LearnerConfig(s=8, eps=Fraction(1, 10), delta=Fraction(1, 10))
        assert c.k == 32

    @pytest.mark.parametrize("eps,delta", [(0, 0.1), (0.5, 0.1), (0.1, 0), (0.1, 1)])
    def test_ranges(self, eps, delta):
        with pytest.raises(ValueError):
            L.LearnerConfig(s=4, eps=eps, delta=delta)


class TestLearners:
    def test_constant_target(self):
        tree, rep = L.learn_monotone(B.constant(-1, 5), L.LearnerConfig(4, Fraction(1, 10), Fraction(1, 10)))
        assert tree == Leaf(-1) and rep.steps == [] and rep.true_error == 0

    def test_rejects_nonmonotone(self):
        with pytest.raises(ValueError):
            L.learn_monotone(B.parity(2), L.LearnerConfig(4, Fraction(1, 10), Fraction(1, 10)))

    def test_majority3(self):
        ok = 0
        for t in range(100):
            cfg = L.LearnerConfig(6, Fraction(1, 20), Fraction(1, 10), seed=t)
            _, rep = L.learn_monotone(B.majority(3), cfg)
            ok += rep.true_error <= Fraction(1, 20)
        assert ok >= 90

    def test_edges_recover_parity(self):
        cfg = L.LearnerConfig(4, Fraction(1, 10), Fraction(1, 10), seed=3)
        tree, rep = L.learn_general(B.parity(2, n=6), cfg)
        assert D.size(tree) == 4 and rep.true_error == 0

    def test_report_json(self):
        cfg = L.LearnerConfig(4, Fraction(1, 10), Fraction(1, 10), seed=1)
        _, rep = L.learn_monotone(B.majority(3), cfg)
        d = rep.to_json()
        assert d["mode"] == "monotone" and d["m_train"] == L.sample_size_monotone(16, 4, 0.1, 0.1)

    def test_step_budget_flag(self):
        f = B.majority(7)
        cfg = L.LearnerConfig(2, Fraction(1, 100), Fraction(1, 10), k=1, seed=0)
        tree, rep = L.learn_monotone(f, cfg, m=2000)
        assert rep.termination == "budget" and D.size(tree) == 2
