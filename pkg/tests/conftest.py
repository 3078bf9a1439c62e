"""Shared strategies and brute-force reference computations.

The helpers here deliberately avoid the library's kernels: they walk all
2^n points one at a time, so they serve as independent oracles.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from topdown_dt.boolfn import TruthTable
from topdown_dt.dtree import Leaf, Node

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


# --------------------------------------------------------------------------
# strategies


@st.composite
def truth_tables(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    bits = draw(st.integers(0, (1 << (1 << n)) - 1))
    return TruthTable(n, bits)


@st.composite
def trees(draw, n, max_depth=None):
    """Random decision trees over x_1..x_n with no repeated variable on a path."""
    max_depth = n if max_depth is None else max_depth

    def build(free, budget):
        if not free or budget == 0 or draw(st.integers(0, 3)) == 0:
            return Leaf(draw(st.sampled_from([-1, 1])))
        v = draw(st.sampled_from(sorted(free)))
        rest = free - {v}
        return Node(v, build(rest, budget - 1), build(rest, budget - 1))

    return build(frozenset(range(1, n + 1)), max_depth)


# --------------------------------------------------------------------------
# brute force


def bf_value(f: TruthTable, x: int) -> int:
    return 1 if (f.bits >> x) & 1 else -1


def bf_points(n):
    return range(1 << n)


def bf_influence(f: TruthTable, i: int) -> Fraction:
    flips = sum(bf_value(f, x) != bf_value(f, x ^ (1 << (i - 1))) for x in bf_points(f.n))
    return Fraction(flips, 1 << f.n)


def bf_mean(f: TruthTable) -> Fraction:
    return Fraction(sum(bf_value(f, x) for x in bf_points(f.n)), 1 << f.n)


def bf_tree_value(tree, x: int) -> int:
    while isinstance(tree, Node):
        tree = tree.child1 if (x >> (tree.var - 1)) & 1 else tree.child0
    return tree.label


def bf_disagreement(f: TruthTable, g: TruthTable) -> Fraction:
    bad = sum(bf_value(f, x) != bf_value(g, x) for x in bf_points(f.n))
    return Fraction(bad, 1 << f.n)


def bf_table(n, fn) -> TruthTable:
    """Table of fn over tuples (x_1, ..., x_n)."""
    bits = 0
    for x in bf_points(n):
        pt = tuple((x >> j) & 1 for j in range(n))
        if fn(pt) == 1:
            bits |= 1 << x
    return TruthTable(n, bits)


def bf_min_tree_size(f: TruthTable) -> int:
    """Exhaustive minimum leaf count, with no memo keyed on anything clever."""
    cache = {}

    def rec(assign):
        key = tuple(sorted(assign.items()))
        if key in cache:
            return cache[key]
        pts = [x for x in bf_points(f.n) if all(((x >> (i - 1)) & 1) == b for i, b in assign.items())]
        vals = {bf_value(f, x) for x in pts}
        if len(vals) <= 1:
            cache[key] = 1
            return 1
        best = None
        for i in range(1, f.n + 1):
            if i in assign:
                continue
            c = rec({**assign, i: 0}) + rec({**assign, i: 1})
            best = c if best is None else min(best, c)
        cache[key] = best
        return best

    return rec({})


def all_points(n):
    return list(itertools.product((0, 1), repeat=n))


@pytest.fixture
def and2():
    return bf_table(2, lambda x: 1 if x[0] and x[1] else -1)


# --------------------------------------------------------------------------
# acceptance summary

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record_acceptance(number: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        line = f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
