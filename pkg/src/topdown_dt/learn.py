"""Sample-based top-down learners under the uniform distribution.

Two score estimators stand in for exact influences:

* random examples (monotone targets), using
  ``E[1[x reaches l] f(x) (2 x_i - 1)]``, which equals the correlation
  score and hence the influence score for monotone f;
* random edges ``(x, x ^ e_i)`` (general targets), using the fraction of
  edges in direction i whose endpoints both reach the leaf and disagree.

The learner runs the greedy top-down loop with these estimates, stopping
once a fresh validation sample says the completion is within eps/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol

import numpy as np

from . import kernels
from .boolfn import Restriction, TruthTable, is_monotone, restrict
from .dtree import DecisionTree, Leaf, Node, to_truth_table
from .dtree import size as tree_size
from .boolfn import error as table_error
from .dyadic import DyadicRational

C_EXAMPLES = 12
C_EDGES = 4


# --------------------------------------------------------------------------
# targets


class TargetOracle(Protocol):
    n: int

    def __call__(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - protocol
        ...


def table_array(f: TruthTable) -> np.ndarray:
    """The table as a uint8 array of 0/1 indexed by point."""
    nbytes = max(1, f.size // 8)
    raw = np.frombuffer(f.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[: f.size]


class TableOracle:
    """Membership access to a known truth table."""

    def __init__(self, f: TruthTable):
        self.table = f
        self.n = f.n
        self._arr = table_array(f).astype(np.int8) * 2 - 1

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._arr[np.asarray(x, dtype=np.int64)]

    @property
    def descriptor(self) -> str:
        return f"table(n={self.n})"


def as_oracle(target) -> TargetOracle:
    if isinstance(target, TruthTable):
        return TableOracle(target)
    return target


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# --------------------------------------------------------------------------
# samples


@dataclass
class ExampleSample:
    n: int
    points: np.ndarray  # int64 point indices
    labels: np.ndarray  # int8, ±1
    seed: object = None
    target: str = ""

    def __len__(self):
        return len(self.points)

    @property
    def examples(self) -> list:
        return [
            (tuple((int(x) >> j) & 1 for j in range(self.n)), int(y))
            for x, y in zip(self.points, self.labels)
        ]

    def bit(self, i: int) -> np.ndarray:
        return (self.points >> (i - 1)) & 1


@dataclass
class EdgeSample:
    n: int
    points: np.ndarray  # x
    dirs: np.ndarray  # flipped coordinate, 1-indexed
    labels: np.ndarray  # f(x)
    labels_flip: np.ndarray  # f(x ^ e_i)
    seed: object = None
    target: str = ""

    def __len__(self):
        return len(self.points)

    @property
    def flipped(self) -> np.ndarray:
        return self.points ^ (np.int64(1) << (self.dirs.astype(np.int64) - 1))

    @property
    def edges(self) -> list:
        out = []
        for x, x2, y, y2 in zip(self.points, self.flipped, self.labels, self.labels_flip):
            out.append(((int(x), int(y)), (int(x2), int(y2))))
        return out

    def part(self, i: int) -> np.ndarray:
        """Indices of E_i, the edges flipping coordinate i."""
        return np.flatnonzero(self.dirs == i)


def draw_examples(target, m: int, seed) -> ExampleSample:
    oracle = as_oracle(target)
    rng = _rng(seed)
    x = rng.integers(0, 1 << oracle.n, size=m, dtype=np.int64)
    return ExampleSample(oracle.n, x, oracle(x).astype(np.int8), seed, getattr(oracle, "descriptor", ""))


def draw_edges(target, m: int, seed) -> EdgeSample:
    oracle = as_oracle(target)
    rng = _rng(seed)
    n = oracle.n
    x = rng.integers(0, 1 << n, size=m, dtype=np.int64)
    d = rng.integers(1, n + 1, size=m, dtype=np.int64)
    x2 = x ^ (np.int64(1) << (d - 1))
    return EdgeSample(n, x, d, oracle(x).astype(np.int8), oracle(x2).astype(np.int8), seed,
                      getattr(oracle, "descriptor", ""))


def full_sample(f: TruthTable) -> ExampleSample:
    """Every point of the cube exactly once."""
    x = np.arange(f.size, dtype=np.int64)
    return ExampleSample(f.n, x, TableOracle(f)(x).astype(np.int8), None, "full")


def complete_edges(f: TruthTable, i: int) -> EdgeSample:
    """All 2^(n-1) edges in direction i."""
    oracle = TableOracle(f)
    x = np.arange(f.size, dtype=np.int64)
    x = x[((x >> (i - 1)) & 1) == 0]
    d = np.full(len(x), i, dtype=np.int64)
    x2 = x | (np.int64(1) << (i - 1))
    return EdgeSample(f.n, x, d, oracle(x).astype(np.int8), oracle(x2).astype(np.int8), None, "complete")


# --------------------------------------------------------------------------
# estimators


def _reach_mask(points: np.ndarray, leaf: Restriction) -> np.ndarray:
    mask = np.ones(len(points), dtype=bool)
    for i, b in leaf:
        mask &= ((points >> (i - 1)) & 1) == b
    return mask


def estimate_score_monotone(S: ExampleSample, leaf: Restriction, i: int) -> Fraction:
    """Empirical mean of 1[x reaches l] f(x) (2 x_i - 1); exact Fraction."""
    if i in leaf.coords:
        raise ValueError(f"x{i} is fixed by the leaf {leaf}")
    if len(S) == 0:
        return Fraction(0)
    reach = _reach_mask(S.points, leaf)
    sign = 2 * S.bit(i)[reach].astype(np.int64) - 1
    return Fraction(int(np.dot(S.labels[reach].astype(np.int64), sign)), len(S))


def estimate_score_edges(E: EdgeSample, leaf: Restriction, i: int):
    """Fraction of E_i whose endpoints both reach l and disagree; None if E_i is empty."""
    idx = E.part(i)
    if len(idx) == 0:
        return None
    x, x2 = E.points[idx], E.flipped[idx]
    both = _reach_mask(x, leaf) & _reach_mask(x2, leaf)
    differ = E.labels[idx] != E.labels_flip[idx]
    return Fraction(int(np.count_nonzero(both & differ)), len(idx))


# --------------------------------------------------------------------------
# sample sizes


def sample_size_monotone(k: int, s: int, eps, delta) -> int:
    """ceil(12 (k log2 s / eps)(log2 k + log2(1/delta))), at least 1."""
    eps, delta = float(eps), float(delta)
    val = C_EXAMPLES * (k * math.log2(s) / eps) * (math.log2(k) + math.log2(1 / delta))
    return max(1, math.ceil(val))


def edge_sample_size(n: int, m: int, delta) -> int:
    """ceil(4 n (m + ln(1/delta)))."""
    return max(1, math.ceil(C_EDGES * n * (m + math.log(1 / float(delta)))))


def validation_size(eps, delta, k: int) -> int:
    """ceil(32/eps^2 ln(4k/delta))."""
    eps, delta = float(eps), float(delta)
    return max(1, math.ceil(32 / eps**2 * math.log(4 * max(k, 1) / delta)))


# --------------------------------------------------------------------------
# learners


@dataclass(frozen=True)
class LearnerConfig:
    s: int
    eps: Fraction
    delta: Fraction
    k: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not 0 < self.eps < Fraction(1, 2):
            raise ValueError(f"eps must lie in (0, 1/2), got {self.eps}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.s < 1:
            raise ValueError("size bound must be at least 1")
        if self.k is None:
            object.__setattr__(self, "k", default_step_budget(self.s))

    def stream(self, *labels: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, *labels])


def default_step_budget(s: int) -> int:
    """Four splits per leaf of the size bound."""
    return max(1, 4 * s)


@dataclass
class StepRecord:
    path: Restriction
    var: int
    estimate: Fraction
    true_score: DyadicRational | None = None
    true_max: DyadicRational | None = None

    @property
    def quarter_ok(self) -> bool | None:
        if self.true_score is None:
            return None
        return 4 * self.true_score.to_fraction() >= self.true_max.to_fraction()


@dataclass
class LearnReport:
    mode: str
    m_train: int
    m_valid: int
    steps: list = field(default_factory=list)
    termination: str = ""
    validation_error: Fraction | None = None
    true_error: DyadicRational | None = None
    size: int = 1

    @property
    def quarter_ok(self) -> bool | None:
        flags = [s.quarter_ok for s in self.steps]
        if any(f is None for f in flags):
            return None
        return all(flags)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "m_train": self.m_train,
            "m_valid": self.m_valid,
            "steps": len(self.steps),
            "size": self.size,
            "termination": self.termination,
            "validation_error": None if self.validation_error is None else float(self.validation_error),
            "true_error": None if self.true_error is None else str(self.true_error),
            "quarter_ok": self.quarter_ok,
        }


class _SampleLeaf:
    __slots__ = ("path", "key", "train", "valid", "scores", "label")

    def __init__(self, path, train, valid):
        self.path = path
        self.key = path.bitstring()
        self.train = train  # indices into the training arrays reaching this leaf
        self.valid = valid
        self.scores = None
        self.label = 1


def _exact_scores(f: TruthTable, leaf: Restriction) -> dict[int, DyadicRational]:
    sub = restrict(f, leaf)
    free = [i for i in range(1, f.n + 1) if i not in leaf.coords]
    counts = kernels.influence_counts(sub.bits, sub.n) if sub.n else []
    return {v: DyadicRational(c, f.n - 1) for v, c in zip(free, counts)}


def _grow(n, train_pts, train_lab, valid_pts, valid_lab, leaf_scores, k, eps, table):
    """Shared greedy loop; ``leaf_scores(leaf)`` returns {var: estimate}."""
    root = _SampleLeaf(Restriction(), np.arange(len(train_pts)), np.arange(len(valid_pts)))
    leaves = {root.key: root}
    internal: dict[str, int] = {}
    steps: list[StepRecord] = []

    def refresh(leaf):
        lab = train_lab[leaf.train]
        leaf.label = 1 if 2 * int(np.count_nonzero(lab == 1)) >= len(lab) else -1
        leaf.scores = leaf_scores(leaf)

    def valid_errors():
        bad = 0
        for lf in leaves.values():
            bad += int(np.count_nonzero(valid_lab[lf.valid] != lf.label))
        return Fraction(bad, max(1, len(valid_pts)))

    refresh(root)
    termination = "accuracy"
    while True:
        verr = valid_errors()
        if verr <= eps / 2:
            break
        if len(steps) >= k:
            termination = "budget"
            break
        best = None
        for lf in sorted(leaves.values(), key=lambda lf: lf.key):
            for v, est in sorted(lf.scores.items()):
                if est is None:
                    continue
                if best is None or est > best[0]:
                    best = (est, lf, v)
        if best is None:
            termination = "exhausted"
            break
        est, lf, v = best
        rec = StepRecord(lf.path, v, est)
        if table is not None:
            rec.true_score = _exact_scores(table, lf.path)[v]
            rec.true_max = max(
                (sc for other in leaves.values() for sc in _exact_scores(table, other.path).values()),
                default=DyadicRational(0),
            )
        steps.append(rec)
        del leaves[lf.key]
        internal[lf.key] = v
        tbit = (train_pts[lf.train] >> (v - 1)) & 1
        vbit = (valid_pts[lf.valid] >> (v - 1)) & 1
        for b in (0, 1):
            kid = _SampleLeaf(lf.path.extend(v, b), lf.train[tbit == b], lf.valid[vbit == b])
            refresh(kid)
            leaves[kid.key] = kid

    def build(key):
        if key in internal:
            v = internal[key]
            return Node(v, build(key + "0"), build(key + "1"))
        return Leaf(leaves[key].label)

    return build(""), steps, termination, verr


def _finish(report: LearnReport, tree: DecisionTree, table: TruthTable | None):
    report.size = tree_size(tree)
    if table is not None:
        report.true_error = table_error(to_truth_table(tree, table.n), table)


def learn_monotone(target, config: LearnerConfig, m: int | None = None) -> tuple[DecisionTree, LearnReport]:
    """Top-down learning of a monotone target from uniform random examples."""
    oracle = as_oracle(target)
    table = getattr(oracle, "table", None)
    if table is not None and not is_monotone(table):
        raise ValueError("learn_monotone needs a monotone target")
    n = oracle.n
    m = sample_size_monotone(config.k, config.s, config.eps, config.delta) if m is None else m
    mv = validation_size(config.eps, config.delta, config.k)
    S = draw_examples(oracle, m, config.stream(0))
    V = draw_examples(oracle, mv, config.stream(1))
    labels = S.labels.astype(np.int64)
    signs = {i: 2 * S.bit(i).astype(np.int64) - 1 for i in range(1, n + 1)}

    def scores(leaf):
        ys = labels[leaf.train]
        return {
            i: Fraction(int(np.dot(ys, signs[i][leaf.train])), m)
            for i in range(1, n + 1)
            if i not in leaf.path.coords
        }

    tree, steps, term, verr = _grow(n, S.points, S.labels, V.points, V.labels, scores, config.k, config.eps, table)
    report = LearnReport("monotone", m, mv, steps, term, verr)
    _finish(report, tree, table)
    return tree, report


def learn_general(target, config: LearnerConfig, m_edges: int | None = None) -> tuple[DecisionTree, LearnReport]:
    """Top-down learning of an arbitrary target from uniform random edges."""
    oracle = as_oracle(target)
    table = getattr(oracle, "table", None)
    n = oracle.n
    if m_edges is None:
        m = sample_size_monotone(config.k, config.s, config.eps, config.delta)
        m_edges = edge_sample_size(n, m, config.delta)
    mv = validation_size(config.eps, config.delta, config.k)
    E = draw_edges(oracle, m_edges, config.stream(0))
    V = draw_examples(oracle, mv, config.stream(1))
    part_sizes = np.bincount(E.dirs, minlength=n + 1)
    differ = E.labels != E.labels_flip

    def scores(leaf):
        # an edge in a free direction has both endpoints in the leaf iff x does
        idx = leaf.train[differ[leaf.train]]
        hits = np.bincount(E.dirs[idx], minlength=n + 1)
        out = {}
        for i in range(1, n + 1):
            if i in leaf.path.coords:
                continue
            out[i] = None if part_sizes[i] == 0 else Fraction(int(hits[i]), int(part_sizes[i]))
        return out

    tree, steps, term, verr = _grow(n, E.points, E.labels, V.points, V.labels, scores, config.k, config.eps, table)
    report = LearnReport("edges", m_edges, mv, steps, term, verr)
    _finish(report, tree, table)
    return tree, report
