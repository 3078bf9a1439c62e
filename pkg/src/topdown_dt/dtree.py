"""Decision trees, bare trees, completions, cost and the optimal-size oracle."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterator, Sequence, Union

from . import kernels
from .boolfn import (
    FamilyParams,
    Restriction,
    TruthTable,
    _Algebra,
    biased_tribes_width,
    family_layout,
    point_index,
    random_tree_shape,
    restrict,
    total_influence,
    tribes_width,
)
from .dyadic import DyadicRational, ZERO


@dataclass(frozen=True)
class Leaf:
    label: int

    def __post_init__(self):
        if self.label not in (1, -1):
            raise ValueError(f"leaf label must be +1 or -1, got {self.label!r}")


@dataclass(frozen=True)
class Node:
    var: int
    child0: "DecisionTree"
    child1: "DecisionTree"

    def __post_init__(self):
        if not isinstance(self.var, int) or self.var < 1:
            raise ValueError(f"variables are 1-indexed positive ints, got {self.var!r}")


DecisionTree = Union[Leaf, Node]


@dataclass(frozen=True)
class TreeStats:
    size: int
    depth: int
    average_depth: DyadicRational


# --------------------------------------------------------------------------
# bare trees


@dataclass(frozen=True)
class BareLeaf:
    path: Restriction

    @property
    def depth(self) -> int:
        return len(self.path)


@dataclass(frozen=True)
class BareNode:
    var: int
    child0: "BareShape"
    child1: "BareShape"


BareShape = Union[BareLeaf, BareNode]


class BareTree:
    """A tree with unlabeled leaves; each leaf knows its defining restriction."""

    __slots__ = ("root",)

    def __init__(self, root: BareShape | None = None):
        self.root = BareLeaf(Restriction()) if root is None else root

    @classmethod
    def from_tree(cls, tree: DecisionTree) -> "BareTree":
        def rec(t, path):
            if isinstance(t, Leaf):
                return BareLeaf(path)
            return BareNode(t.var, rec(t.child0, path.extend(t.var, 0)), rec(t.child1, path.extend(t.var, 1)))

        return cls(rec(tree, Restriction()))

    @classmethod
    def complete(cls, n: int) -> "BareTree":
        """The full depth-n tree querying 1, 2, ..., n in order."""

        def rec(i, path):
            if i > n:
                return BareLeaf(path)
            return BareNode(i, rec(i + 1, path.extend(i, 0)), rec(i + 1, path.extend(i, 1)))

        return cls(rec(1, Restriction()))

    def leaves(self) -> list[BareLeaf]:
        """Leaves left to right (0-branch before 1-branch)."""
        out = []
        stack = [self.root]
        while stack:
            t = stack.pop()
            if isinstance(t, BareLeaf):
                out.append(t)
            else:
                stack.append(t.child1)
                stack.append(t.child0)
        return out

    def split(self, path: Restriction, var: int) -> "BareTree":
        """Replace the leaf at ``path`` by a query to ``var``."""
        if var in path.coords:
            raise ValueError(f"x{var} already queried on path {path}")

        def rec(t, depth):
            if isinstance(t, BareLeaf):
                if t.path != path:
                    raise KeyError(f"no leaf with path {path}")
                return BareNode(var, BareLeaf(path.extend(var, 0)), BareLeaf(path.extend(var, 1)))
            i, b = path.assignments[depth]
            if i != t.var:
                raise KeyError(f"no leaf with path {path}")
            if b == 0:
                return BareNode(t.var, rec(t.child0, depth + 1), t.child1)
            return BareNode(t.var, t.child0, rec(t.child1, depth + 1))

        return BareTree(rec(self.root, 0))

    def labeled(self, labels: Callable[[BareLeaf], int]) -> DecisionTree:
        def rec(t):
            if isinstance(t, BareLeaf):
                return Leaf(labels(t))
            return Node(t.var, rec(t.child0), rec(t.child1))

        return rec(self.root)

    @property
    def size(self) -> int:
        return len(self.leaves())

    def __eq__(self, other):
        return isinstance(other, BareTree) and self.root == other.root

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"BareTree(size={self.size})"


# --------------------------------------------------------------------------
# basic semantics


def iter_leaves(tree: DecisionTree) -> Iterator[tuple[Restriction, int]]:
    """(path, label) pairs left to right."""
    stack = [(tree, Restriction())]
    while stack:
        t, path = stack.pop()
        if isinstance(t, Leaf):
            yield path, t.label
        else:
            stack.append((t.child1, path.extend(t.var, 1)))
            stack.append((t.child0, path.extend(t.var, 0)))


def max_var(tree: DecisionTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return max(tree.var, max_var(tree.child0), max_var(tree.child1))


def validate(tree: DecisionTree, n: int | None = None) -> None:
    """Raise ValueError if a variable repeats on a path or exceeds ``n``."""

    def rec(t, seen):
        if isinstance(t, Leaf):
            return
        if n is not None and t.var > n:
            raise ValueError(f"variable {t.var} out of range for n={n}")
        if t.var in seen:
            raise ValueError(f"variable {t.var} repeats on a root-to-leaf path")
        seen = seen | {t.var}
        rec(t.child0, seen)
        rec(t.child1, seen)

    rec(tree, frozenset())


def eval_tree(tree: DecisionTree, x, n: int | None = None) -> int:
    if n is None:
        n = len(x) if not isinstance(x, int) else max(max_var(tree), int(x).bit_length())
    idx = point_index(x, n)
    t = tree
    while isinstance(t, Node):
        if t.var > n:
            raise ValueError(f"variable {t.var} out of range for n={n}")
        t = t.child1 if (idx >> (t.var - 1)) & 1 else t.child0
    return t.label


def to_truth_table(tree: DecisionTree, n: int) -> TruthTable:
    if max_var(tree) > n:
        raise ValueError(f"tree queries x{max_var(tree)} but n={n}")
    alg = _Algebra(n)

    def rec(t):
        if isinstance(t, Leaf):
            return alg.full if t.label == 1 else 0
        return alg.mux(alg.lit(t.var), rec(t.child1), rec(t.child0))

    return TruthTable(n, rec(tree))


def stats(tree: DecisionTree) -> TreeStats:
    size = depth = 0
    acc = ZERO
    for path, _ in iter_leaves(tree):
        d = len(path)
        size += 1
        depth = max(depth, d)
        acc = acc + DyadicRational(d, d)
    return TreeStats(size, depth, acc)


def size(tree) -> int:
    if isinstance(tree, BareTree):
        return tree.size
    return sum(1 for _ in iter_leaves(tree))


def depth(tree: DecisionTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.child0), depth(tree.child1))


# --------------------------------------------------------------------------
# completion and cost


def completion_label(sub: TruthTable) -> int:
    """sign(E[f_l]) with a zero mean labelled +1."""
    return 1 if 2 * sub.ones >= sub.size else -1


def f_completion(bare: BareTree, f: TruthTable) -> DecisionTree:
    return bare.labeled(lambda leaf: completion_label(restrict(f, leaf.path)))


def completion_error(bare: BareTree, f: TruthTable) -> DyadicRational:
    """error(f_completion(bare, f), f), summed leaf by leaf."""
    total = ZERO
    for leaf in bare.leaves():
        sub = restrict(f, leaf.path)
        total = total + DyadicRational(min(sub.ones, sub.size - sub.ones), f.n)
    return total


def cost(bare: BareTree, f: TruthTable) -> DyadicRational:
    """Sum over leaves of 2^-|l| Inf(f_l)."""
    total = ZERO
    for leaf in bare.leaves():
        total = total + total_influence(restrict(f, leaf.path)).scale(-leaf.depth)
    return total


# --------------------------------------------------------------------------
# oracle


def optimal_size(f: TruthTable) -> int:
    return kernels.optimal_size(f.bits, f.n)


def optimal_depth(f: TruthTable) -> int:
    return kernels.optimal_depth(f.bits, f.n)


def optimal_tree(f: TruthTable) -> DecisionTree:
    """A minimum-size tree for ``f``, lowest root variable among the optima."""

    def rec(bits: int, n: int, coords: list[int]):
        full = (1 << (1 << n)) - 1
        if bits == 0:
            return Leaf(-1)
        if bits == full:
            return Leaf(1)
        target = kernels.optimal_size(bits, n)
        for j in range(1, n + 1):
            b0 = kernels.restrict(bits, n, j, 0)
            b1 = kernels.restrict(bits, n, j, 1)
            if b0 == b1:
                continue
            if kernels.optimal_size(b0, n - 1) + kernels.optimal_size(b1, n - 1) == target:
                rest = coords[:j - 1] + coords[j:]
                return Node(coords[j - 1], rec(b0, n - 1, rest), rec(b1, n - 1, rest))
        raise AssertionError("oracle inconsistency")  # pragma: no cover

    return rec(f.bits, f.n, list(range(1, f.n + 1)))


def is_pruning_of(small, big) -> bool:
    """Is every internal node of ``small`` an internal node of ``big`` with the same variable?"""
    a = small.root if isinstance(small, BareTree) else small
    b = big.root if isinstance(big, BareTree) else big

    def internal(t):
        return isinstance(t, (Node, BareNode))

    def rec(s, t):
        if not internal(s):
            return True
        if not internal(t) or s.var != t.var:
            return False
        return rec(s.child0, t.child0) and rec(s.child1, t.child1)

    return rec(a, b)


# --------------------------------------------------------------------------
# JSON


def to_json(tree: DecisionTree):
    if isinstance(tree, Leaf):
        return {"leaf": tree.label}
    return {"var": tree.var, "0": to_json(tree.child0), "1": to_json(tree.child1)}


def from_json(obj, where: str = "$") -> DecisionTree:
    if not isinstance(obj, dict):
        raise ValueError(f"{where}: expected an object, got {type(obj).__name__}")
    if "leaf" in obj:
        extra = set(obj) - {"leaf"}
        if extra:
            raise ValueError(f"{where}: unexpected keys {sorted(extra)} in leaf")
        label = obj["leaf"]
        if isinstance(label, bool) or label not in (1, -1):
            raise ValueError(f"{where}.leaf: label must be 1 or -1, got {label!r}")
        return Leaf(label)
    missing = {"var", "0", "1"} - set(obj)
    if missing:
        raise ValueError(f"{where}: node is missing {sorted(missing)}")
    extra = set(obj) - {"var", "0", "1"}
    if extra:
        raise ValueError(f"{where}: unexpected keys {sorted(extra)} in node")
    var = obj["var"]
    if isinstance(var, bool) or not isinstance(var, int) or var < 1:
        raise ValueError(f"{where}.var: variables are 1-indexed positive ints, got {var!r}")
    return Node(var, from_json(obj["0"], f"{where}.0"), from_json(obj["1"], f"{where}.1"))


def serialize(tree: DecisionTree) -> bytes:
    return json.dumps(to_json(tree), separators=(",", ":")).encode()


def deserialize(data) -> DecisionTree:
    if isinstance(data, bytes):
        data = data.decode()
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    tree = from_json(obj)
    validate(tree)
    return tree


# --------------------------------------------------------------------------
# generators


def from_shape(shape) -> DecisionTree:
    if isinstance(shape, tuple):
        v, t0, t1 = shape
        return Node(v, from_shape(t0), from_shape(t1))
    return Leaf(int(shape))


def random_tree(n: int, s: int, seed) -> DecisionTree:
    return from_shape(random_tree_shape(n, s, seed))


def _query_until_determined(coords: Sequence[int], classify, leaf_for, fixed=()):
    """Query ``coords`` in order, stopping once ``classify`` is constant on the subcube.

    ``classify`` maps a full assignment of ``coords`` (a tuple of bits) to a
    case label; ``leaf_for(case)`` supplies the subtree for that case.
    """
    rest = len(coords) - len(fixed)
    cases = {classify(fixed + tail) for tail in product((0, 1), repeat=rest)}
    if len(cases) == 1:
        return leaf_for(cases.pop())
    v = coords[len(fixed)]
    return Node(
        v,
        _query_until_determined(coords, classify, leaf_for, fixed + (0,)),
        _query_until_determined(coords, classify, leaf_for, fixed + (1,)),
    )


def _tribes_pred(width: int):
    def pred(bits):
        t = len(bits) // width
        return any(all(bits[j * width:(j + 1) * width]) for j in range(t))

    return pred


def natural_tree(family: str, p: FamilyParams) -> DecisionTree:
    """The tree that follows a family's inductive definition block by block.

    Each block is queried in coordinate order until its case is decided; the
    decided case is then replaced by the subtree the definition selects.
    Its leaf count is the construction upper bound on the optimal size.
    """
    layout = family_layout(family, p)
    pos, neg = Leaf(1), Leaf(-1)

    def lit_tree(case):
        return pos if case else neg

    def base():
        z = layout.coords("z")
        if family.startswith("exact"):
            return Node(z[0], neg, pos)
        return _query_until_determined(z, _tribes_pred(tribes_width(len(z))), lit_tree)

    def rec(h):
        if h == 0:
            return base()
        y = layout.coords("y", h)
        if family == "exact-nonmonotone":
            xs = layout.coords("x", h)
            ytree = Node(y[0], neg, pos)
            below = rec(h - 1)
            return _query_until_determined(xs, lambda b: bool(b[0] or b[1]), lambda c: ytree if c else below)
        if family == "exact-monotone":
            xs = layout.coords("x", h)
            star = (0, 0, 1, 1)

            def case(bits):
                if bits == star:
                    return "rec"
                if all(a >= s for a, s in zip(bits, star)):
                    return "pos"
                if all(a <= s for a, s in zip(bits, star)):
                    return "neg"
                return "y"

            sub = {"rec": rec(h - 1), "pos": pos, "neg": neg, "y": Node(y[0], neg, pos)}
            return _query_until_determined(xs, case, sub.__getitem__)
        if family == "approx-nonmonotone":
            xs = layout.coords("x", h)
            ptree = _query_until_determined(y, lambda b: sum(b) % 2 == 1, lit_tree)
            below = rec(h - 1)
            return _query_until_determined(xs, lambda b: sum(b) <= 1, lambda c: ptree if c else below)
        xa, xb = layout.coords("x", h, 1), layout.coords("x", h, 2)
        pa = _tribes_pred(biased_tribes_width(p.ell, p.delta))
        pb = _tribes_pred(biased_tribes_width(p.ell, 1 - p.delta))
        mtree = _query_until_determined(y, lambda b: 2 * sum(b) > len(b), lit_tree)
        below = rec(h - 1)
        sub = {(0, 0): neg, (0, 1): below, (1, 0): mtree, (1, 1): pos}
        return _query_until_determined(
            xa,
            pa,
            lambda a: _query_until_determined(xb, pb, lambda b: sub[(int(a), int(b))]),
        )

    return rec(p.h)


def log2_guarded(s: int) -> float:
    return math.log2(s) if s > 1 else 0.0
