"""Top-down greedy decision-tree construction with pluggable split criteria.

The builder keeps, for every leaf, the restricted truth table and its
edge counts. Because a leaf at depth |l| over an n-variable target has
n - |l| free coordinates, every exact quantity shares the denominator
2**(n-1):

    score(l, i) = 2^-|l| Inf_i(f_l) = edges_i(f_l) / 2^(n-1)
    cost(T)     = sum_l sum_i edges_i(f_l) / 2^(n-1)

so leaves are compared by integer edge counts.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import kernels
from .boolfn import Layout, Restriction, TruthTable, restrict
from .dtree import BareLeaf, BareNode, BareTree, DecisionTree, Leaf, Node
from .dyadic import DyadicRational

DEFAULT_BUDGET = 1 << 22
IMPURITY_TIE = 1e-12
BOUND_SLACK = 1e-9


# --------------------------------------------------------------------------
# impurity functions


def entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def gini(p: float) -> float:
    return 4.0 * p * (1.0 - p)


def sqrt_impurity(p: float) -> float:
    return 2.0 * math.sqrt(max(p * (1.0 - p), 0.0))


IMPURITY_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "entropy": entropy,
    "gini": gini,
    "sqrt": sqrt_impurity,
}


@dataclass(frozen=True)
class SplitCriterion:
    """``influence``, ``correlation`` or ``impurity`` with G in entropy/gini/sqrt."""

    kind: str
    impurity: str | None = None

    def __post_init__(self):
        if self.kind not in ("influence", "correlation", "impurity"):
            raise ValueError(f"unknown criterion {self.kind!r}")
        if self.kind == "impurity":
            if self.impurity not in IMPURITY_FUNCTIONS:
                raise ValueError(f"impurity function must be one of {sorted(IMPURITY_FUNCTIONS)}")
        elif self.impurity is not None:
            raise ValueError("only the impurity criterion takes a G function")

    @classmethod
    def parse(cls, name: str) -> "SplitCriterion":
        name = name.lower()
        if name in ("influence", "correlation"):
            return cls(name)
        if name in IMPURITY_FUNCTIONS:
            return cls("impurity", name)
        if name.startswith("impurity:") and name[9:] in IMPURITY_FUNCTIONS:
            return cls("impurity", name[9:])
        raise ValueError(f"unknown criterion {name!r}")

    @property
    def G(self) -> Callable[[float], float]:
        return IMPURITY_FUNCTIONS[self.impurity]

    @property
    def name(self) -> str:
        return self.impurity if self.kind == "impurity" else self.kind

    @property
    def exact(self) -> bool:
        return self.kind != "impurity"


INFLUENCE = SplitCriterion("influence")
CORRELATION = SplitCriterion("correlation")
GINI = SplitCriterion("impurity", "gini")
ENTROPY = SplitCriterion("impurity", "entropy")
SQRT = SplitCriterion("impurity", "sqrt")
ALL_CRITERIA = (INFLUENCE, CORRELATION, ENTROPY, GINI, SQRT)


def _prob(ones: int, size: int) -> float:
    return ones / size


def purity_gain(f: TruthTable, i: int, G) -> float:
    """G(p(f)) - (G(p(f_{x_i=0})) + G(p(f_{x_i=1}))) / 2 with p = Pr[f = +1]."""
    if isinstance(G, str):
        G = IMPURITY_FUNCTIONS[G]
    if not 1 <= i <= f.n:
        raise ValueError(f"coordinate {i} out of range for n={f.n}")
    half = f.size // 2
    ones1 = kernels.cofactor_counts(f.bits, f.n)[i - 1]
    ones0 = f.ones - ones1
    return G(_prob(f.ones, f.size)) - 0.5 * (G(ones0 / half) + G(ones1 / half))


def purity_gains(f: TruthTable, G) -> list[float]:
    if isinstance(G, str):
        G = IMPURITY_FUNCTIONS[G]
    half = f.size // 2
    base = G(_prob(f.ones, f.size))
    out = []
    for c1 in kernels.cofactor_counts(f.bits, f.n):
        c0 = f.ones - c1
        out.append(base - 0.5 * (G(c0 / half) + G(c1 / half)))
    return out


def impurity_potential(bare: BareTree, f: TruthTable, G) -> float:
    """Sum over leaves of Pr[x reaches l] G(Pr[f_l = +1])."""
    if isinstance(G, str):
        G = IMPURITY_FUNCTIONS[G]
    total = 0.0
    for leaf in bare.leaves():
        sub = restrict(f, leaf.path)
        total += 2.0 ** -leaf.depth * G(sub.ones / sub.size)
    return total


def score(f: TruthTable, bare: BareTree, leaf: Restriction, i: int) -> DyadicRational:
    """2^-|l| Inf_i(f_l) for the leaf with path ``leaf``."""
    if i in leaf.coords:
        raise ValueError(f"x{i} is already queried on the path {leaf}")
    if leaf not in {lf.path for lf in bare.leaves()}:
        raise ValueError(f"{leaf} is not a leaf of the tree")
    if not 1 <= i <= f.n:
        raise ValueError(f"coordinate {i} out of range for n={f.n}")
    sub = restrict(f, leaf)
    local = i - sum(1 for j in leaf.coords if j < i)
    return DyadicRational(kernels.influence_counts(sub.bits, sub.n)[local - 1], f.n - 1)


def argmax_set(values, tol: float = 0.0) -> set[int]:
    """1-indexed positions within ``tol`` of the maximum."""
    m = max(values)
    if not tol:
        return {j + 1 for j, v in enumerate(values) if v == m}
    return {j + 1 for j, v in enumerate(values) if v >= m - tol}


# --------------------------------------------------------------------------
# trace


def _dy(x: DyadicRational) -> str:
    return str(x)


@dataclass(frozen=True)
class TraceStep:
    step: int
    path: Restriction
    var: int
    score: DyadicRational  # 2^-|l| Inf_i(f_l) of the chosen pair
    criterion_score: object  # DyadicRational for exact criteria, float for impurity
    cost_before: DyadicRational
    cost_after: DyadicRational
    error: DyadicRational  # completion error before this split
    size: int  # leaves before this split

    def to_json(self) -> dict:
        cs = self.criterion_score
        return {
            "step": self.step,
            "path": self.path.to_json(),
            "var": self.var,
            "score": _dy(self.score),
            "criterion_score": _dy(cs) if isinstance(cs, DyadicRational) else repr(float(cs)),
            "cost_before": _dy(self.cost_before),
            "cost_after": _dy(self.cost_after),
            "error": _dy(self.error),
            "size": self.size,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TraceStep":
        cs = obj["criterion_score"]
        cs = DyadicRational.parse(cs) if "/" in cs or cs.lstrip("-").isdigit() else float(cs)
        return cls(
            obj["step"],
            Restriction(tuple(tuple(p) for p in obj["path"])),
            obj["var"],
            DyadicRational.parse(obj["score"]),
            cs,
            DyadicRational.parse(obj["cost_before"]),
            DyadicRational.parse(obj["cost_after"]),
            DyadicRational.parse(obj["error"]),
            obj["size"],
        )


@dataclass
class BuildTrace:
    n: int
    eps: Fraction
    criterion: SplitCriterion
    steps: list = field(default_factory=list)
    tree: DecisionTree | None = None
    bare: BareTree | None = None
    termination: str = ""
    final_error: DyadicRational | None = None
    final_cost: DyadicRational | None = None
    bound_report: "BoundReport | None" = None

    @property
    def size(self) -> int:
        return len(self.steps) + 1

    def to_jsonl(self) -> str:
        return "".join(json.dumps(s.to_json(), sort_keys=True) + "\n" for s in self.steps)

    def summary(self) -> dict:
        return {
            "criterion": self.criterion.name,
            "eps": str(self.eps),
            "n": self.n,
            "size": self.size,
            "steps": len(self.steps),
            "termination": self.termination,
            "final_error": _dy(self.final_error),
            "final_cost": _dy(self.final_cost),
        }


class ScoreBoundViolation(AssertionError):
    pass


# --------------------------------------------------------------------------
# builder


class _LeafState:
    __slots__ = ("path", "key", "bits", "n", "coords", "ones", "edges", "cof", "var", "crit", "rank")

    def __init__(self, path: Restriction, bits: int, coords: list[int]):
        self.path = path
        self.key = path.bitstring()
        self.bits = bits
        self.n = len(coords)
        self.coords = coords
        self.ones = bits.bit_count()
        self.edges = kernels.influence_counts(bits, self.n) if self.n else []
        self.cof = None
        self.var = None  # local index (1-based) of the preferred variable
        self.crit = None
        self.rank = None

    @property
    def constant(self) -> bool:
        return self.ones == 0 or self.ones == (1 << self.n)

    @property
    def error_count(self) -> int:
        return min(self.ones, (1 << self.n) - self.ones)


def _to_fraction(eps) -> Fraction:
    if isinstance(eps, DyadicRational):
        return eps.to_fraction()
    return Fraction(eps)


def _first_max(values) -> int:
    best = 0
    for j in range(1, len(values)):
        if values[j] > values[best]:
            best = j
    return best


def _evaluate_leaf(leaf: _LeafState, crit: SplitCriterion, n_total: int):
    """Pick the leaf's preferred variable and its criterion value."""
    if crit.kind == "influence":
        j = _first_max(leaf.edges)
        leaf.var = j + 1
        leaf.crit = DyadicRational(leaf.edges[j], n_total - 1)
        leaf.rank = leaf.edges[j]
        return
    leaf.cof = kernels.cofactor_counts(leaf.bits, leaf.n)
    if crit.kind == "correlation":
        vals = [abs(2 * c - leaf.ones) for c in leaf.cof]
        j = _first_max(vals)
        leaf.var = j + 1
        leaf.crit = DyadicRational(vals[j], n_total - 1)
        leaf.rank = vals[j]
        return
    G = crit.G
    size = 1 << leaf.n
    half = size >> 1
    base = G(leaf.ones / size)
    gains = [base - 0.5 * (G((leaf.ones - c) / half) + G(c / half)) for c in leaf.cof]
    m = max(gains)
    j = next(k for k, g in enumerate(gains) if g >= m - IMPURITY_TIE)
    leaf.var = j + 1
    leaf.crit = 2.0 ** -len(leaf.path) * gains[j]
    leaf.rank = leaf.crit


def build_top_down(
    f: TruthTable,
    eps=0,
    criterion: SplitCriterion | str = INFLUENCE,
    size_budget: int | None = DEFAULT_BUDGET,
    s: int | None = None,
) -> tuple[DecisionTree, BuildTrace]:
    """Grow a tree greedily until its f-completion is within ``eps`` of ``f``.

    Each iteration checks the completion error first, then splits the leaf
    whose best variable scores highest (variable ties to the lowest index,
    leaf ties to the leftmost leaf). Constant leaves are never split.
    Stops with termination ``"accuracy"`` or, once the tree has
    ``size_budget`` leaves, ``"budget"``. If ``s`` (a size bound for f) is
    given, the per-step score bounds are asserted on the finished trace.
    """
    if isinstance(criterion, str):
        criterion = SplitCriterion.parse(criterion)
    eps = _to_fraction(eps)
    if not 0 <= eps < Fraction(1, 2):
        raise ValueError(f"eps must lie in [0, 1/2), got {eps}")
    budget = DEFAULT_BUDGET if size_budget is None else int(size_budget)
    if budget < 1:
        raise ValueError("size budget must be at least 1")
    n = f.n
    err_limit = eps * (1 << n)  # compare error counts against eps * 2^n

    root = _LeafState(Restriction(), f.bits, list(range(1, n + 1)))
    leaves: dict[str, _LeafState] = {root.key: root}
    internal: dict[str, int] = {}
    err_count = root.error_count
    edge_total = sum(root.edges)
    heap: list = []
    exact = criterion.exact

    def admit(leaf: _LeafState):
        if leaf.constant:
            return
        _evaluate_leaf(leaf, criterion, n)
        if exact:
            heapq.heappush(heap, (-leaf.rank, leaf.key))

    admit(root)
    trace = BuildTrace(n, eps, criterion)
    step = 0
    while True:
        if err_count <= err_limit:
            trace.termination = "accuracy"
            break
        if len(leaves) >= budget:
            trace.termination = "budget"
            break
        if exact:
            _, key = heapq.heappop(heap)
            leaf = leaves[key]
        else:
            cands = [lf for lf in leaves.values() if not lf.constant]
            m = max(lf.rank for lf in cands)
            leaf = min((lf for lf in cands if lf.rank >= m - IMPURITY_TIE), key=lambda lf: lf.key)
        var = leaf.coords[leaf.var - 1]
        cost_before = DyadicRational(edge_total, n - 1)
        err_before = err_count
        chosen = DyadicRational(leaf.edges[leaf.var - 1], n - 1)
        rest = leaf.coords[:leaf.var - 1] + leaf.coords[leaf.var:]
        kids = [
            _LeafState(leaf.path.extend(var, b), kernels.restrict(leaf.bits, leaf.n, leaf.var, b), rest)
            for b in (0, 1)
        ]
        del leaves[leaf.key]
        internal[leaf.key] = var
        err_count -= leaf.error_count
        edge_total -= sum(leaf.edges)
        for kid in kids:
            leaves[kid.key] = kid
            err_count += kid.error_count
            edge_total += sum(kid.edges)
            admit(kid)
        trace.steps.append(
            TraceStep(
                step,
                leaf.path,
                var,
                chosen,
                leaf.crit,
                cost_before,
                DyadicRational(edge_total, n - 1),
                DyadicRational(err_before, n),
                len(leaves) - 1,
            )
        )
        step += 1

    def build(key: str, path: Restriction) -> DecisionTree:
        if key in internal:
            v = internal[key]
            return Node(v, build(key + "0", path.extend(v, 0)), build(key + "1", path.extend(v, 1)))
        lf = leaves[key]
        return Leaf(1 if 2 * lf.ones >= (1 << lf.n) else -1)

    def build_bare(key: str, path: Restriction):
        if key in internal:
            v = internal[key]
            return BareNode(v, build_bare(key + "0", path.extend(v, 0)), build_bare(key + "1", path.extend(v, 1)))
        return BareLeaf(path)

    tree = build("", Restriction())
    trace.tree = tree
    trace.bare = BareTree(build_bare("", Restriction()))
    trace.final_error = DyadicRational(err_count, n)
    trace.final_cost = DyadicRational(edge_total, n - 1) if n else DyadicRational(0)
    if s is not None and criterion.kind == "influence":
        report = assert_score_bounds(trace, s, eps)
        trace.bound_report = report
        if not report.ok:
            raise ScoreBoundViolation(report.first_failure())
    return tree, trace


# --------------------------------------------------------------------------
# score bounds


@dataclass
class BoundCheck:
    step: int
    score: float
    additive_rhs: float
    additive_ok: bool
    multiplicative_rhs: float | None
    multiplicative_ok: bool | None


@dataclass
class BoundReport:
    s: int
    eps: Fraction
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.additive_ok and c.multiplicative_ok is not False for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.additive_ok or c.multiplicative_ok is False]

    def first_failure(self) -> str:
        bad = self.failures
        if not bad:
            return "no failures"
        c = bad[0]
        return (
            f"step {c.step}: score {c.score} vs additive bound {c.additive_rhs}"
            f" / multiplicative bound {c.multiplicative_rhs}"
        )


def assert_score_bounds(trace: BuildTrace, s: int, eps=None, fault: bool = False) -> BoundReport:
    """Check every pre-termination step against the per-step score bounds.

    additive:       score_j >= eps / ((j+1) log2 s)
    multiplicative: score_j >= cost_j / ((j+1) log2(4s/eps) log2 s),
                    checked only when cost_j >= eps log2(4s/eps)

    ``fault=True`` deliberately uses j instead of j+1 (a test of the checker).
    """
    eps = trace.eps if eps is None else _to_fraction(eps)
    checks = []
    log_s = math.log2(s) if s > 1 else 0.0
    for st in trace.steps:
        j = st.step if fault else st.step + 1
        sc = float(st.score)
        if eps == 0:
            add_rhs = 0.0
        elif log_s == 0.0 or j == 0:
            add_rhs = math.inf
        else:
            add_rhs = float(eps) / (j * log_s)
        add_ok = sc + BOUND_SLACK >= add_rhs
        mul_rhs = mul_ok = None
        if eps > 0 and log_s > 0:
            l4 = math.log2(4 * s / float(eps))
            cost = float(st.cost_before)
            if cost >= float(eps) * l4:
                mul_rhs = math.inf if j == 0 else cost / (j * l4 * log_s)
                mul_ok = sc + BOUND_SLACK >= mul_rhs
        checks.append(BoundCheck(st.step, sc, add_rhs, add_ok, mul_rhs, mul_ok))
    return BoundReport(s, eps, checks)


# --------------------------------------------------------------------------
# gateway nodes


def count_z_gateway_nodes(tree: DecisionTree, layout: Layout | frozenset) -> int:
    """Nodes that query a z-coordinate with no z-query above them."""
    z = layout.z_coords if isinstance(layout, Layout) else frozenset(layout)

    def rec(t):
        if isinstance(t, Leaf):
            return 0
        if t.var in z:
            return 1
        return rec(t.child0) + rec(t.child1)

    return rec(tree)


def gateway_nodes_by_paths(tree: DecisionTree, layout: Layout | frozenset) -> int:
    """Same count by walking every root-to-leaf path and collecting first z-nodes."""
    z = layout.z_coords if isinstance(layout, Layout) else frozenset(layout)
    firsts = set()
    for path_bits in _leaf_paths(tree):
        t = tree
        for depth, b in enumerate(path_bits):
            if t.var in z:
                firsts.add(path_bits[:depth])
                break
            t = t.child1 if b else t.child0
    return len(firsts)


def _leaf_paths(tree: DecisionTree) -> list[tuple]:
    out = []
    stack = [(tree, ())]
    while stack:
        t, prefix = stack.pop()
        if isinstance(t, Leaf):
            out.append(prefix)
        else:
            stack.append((t.child0, prefix + (0,)))
            stack.append((t.child1, prefix + (1,)))
    return out
