"""Memory-light recursive proper learner (FIND) and the uniform-sample pipeline.

A sample is stored once, deduplicated into distinct ``(point, label)``
entries with multiplicities. Sub-samples are bitsets over those entries,
so splitting on a variable is a single AND with that variable's column
and no point data is ever copied down the recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import kernels
from .boolfn import Restriction, TruthTable
from .boolfn import error as table_error
from .dtree import DecisionTree, Leaf, Node, depth, to_truth_table
from .learn import ExampleSample, as_oracle, draw_examples, full_sample


# --------------------------------------------------------------------------
# sample store and views


class SampleStore:
    """Distinct (point, label) entries with multiplicities; immutable."""

    def __init__(self, n: int, points, labels):
        self.n = n
        pts = np.asarray(points, dtype=np.int64)
        labs = np.asarray(labels, dtype=np.int64)
        if pts.shape != labs.shape:
            raise ValueError("points and labels differ in length")
        if len(labs) and not np.all((labs == 1) | (labs == -1)):
            raise ValueError("labels must be +1 or -1")
        if len(pts) and (pts.min() < 0 or pts.max() >= (1 << n)):
            raise ValueError(f"point index out of range for n={n}")
        keys = pts * 2 + (labs > 0)
        uniq, counts = np.unique(keys, return_counts=True)
        self.points = uniq >> 1
        self.labels = np.where(uniq & 1, 1, -1)
        self.weights = counts
        self.total = int(counts.sum())
        self.columns = [0] + [self._bitset(((self.points >> (v - 1)) & 1) == 1) for v in range(1, n + 1)]
        self.positives = self._bitset(self.labels == 1)
        top = int(counts.max()).bit_length() if len(counts) else 0
        self.weight_planes = [self._bitset(((counts >> b) & 1) == 1) for b in range(top)]
        self.all = (1 << len(uniq)) - 1

    def _bitset(self, flags: np.ndarray) -> int:
        if len(flags) == 0:
            return 0
        packed = np.packbits(flags.astype(np.uint8), bitorder="little")
        return int.from_bytes(packed.tobytes(), "little")

    def weight(self, mask: int) -> int:
        return sum((mask & p).bit_count() << b for b, p in enumerate(self.weight_planes))


@dataclass(frozen=True)
class SampleView:
    """A sub-sample: the entries of ``store`` consistent with ``restriction``."""

    store: SampleStore
    mask: int
    restriction: Restriction = Restriction()

    @classmethod
    def of(cls, sample: ExampleSample) -> "SampleView":
        store = SampleStore(sample.n, sample.points, sample.labels)
        return cls(store, store.all)

    @classmethod
    def from_points(cls, n: int, points, labels) -> "SampleView":
        store = SampleStore(n, points, labels)
        return cls(store, store.all)

    @property
    def n(self) -> int:
        return self.store.n

    def __len__(self):
        return self.store.weight(self.mask)

    @property
    def distinct(self) -> int:
        return self.mask.bit_count()

    def split(self, v: int) -> tuple["SampleView", "SampleView"]:
        col = self.store.columns[v]
        one = self.mask & col
        return (
            SampleView(self.store, self.mask ^ one, self.restriction.extend(v, 0)),
            SampleView(self.store, one, self.restriction.extend(v, 1)),
        )

    def entries(self) -> np.ndarray:
        """Indices of the entries in this view."""
        idx = [j for j in range(self.store.points.size) if (self.mask >> j) & 1]
        return np.asarray(idx, dtype=np.int64)

    def error_of(self, tree: DecisionTree) -> Fraction:
        """Weighted fraction of this view's examples the tree mislabels."""
        total = len(self)
        if total == 0:
            return Fraction(0)
        bad = 0
        for j in self.entries():
            x = int(self.store.points[j])
            t = tree
            while isinstance(t, Node):
                t = t.child1 if (x >> (t.var - 1)) & 1 else t.child0
            if t.label != int(self.store.labels[j]):
                bad += int(self.store.weights[j])
        return Fraction(bad, total)


def as_view(S) -> SampleView:
    if isinstance(S, SampleView):
        return S
    if isinstance(S, ExampleSample):
        return SampleView.of(S)
    if isinstance(S, TruthTable):
        return SampleView.of(full_sample(S))
    raise TypeError(f"cannot make a sample view from {type(S).__name__}")


# --------------------------------------------------------------------------
# FIND


@dataclass
class FindResult:
    tree: DecisionTree | None
    calls: int
    peak_frames: int

    @property
    def found(self) -> bool:
        return self.tree is not None


def _to_tree(t) -> DecisionTree:
    if t[0] == "leaf":
        return Leaf(t[1])
    v, t0, t1 = t
    return Node(v, _to_tree(t0), _to_tree(t1))


def find(S, s: int, d: int) -> FindResult:
    """Fit ``S`` with a tree of depth <= d, or return None when size s is too small.

    Variables are tried in ascending order and the first success is
    returned; a half-budget failure on one side is retried once with
    budget s - 1. The majority leaf at d = 0 breaks ties toward +1.
    """
    if s < 1:
        raise ValueError("size budget must be at least 1")
    if d < 0:
        raise ValueError("depth budget must be non-negative")
    view = as_view(S)
    st = view.store
    raw, calls, peak = kernels.find_core(view.mask, s, d, st.n, st.columns, st.positives, st.weight_planes)
    return FindResult(None if raw is None else _to_tree(raw), calls, peak)


def find_error_bound(s: int, d: int, c=0) -> Fraction:
    """(1/4)(3/4 + c/4)^d s."""
    c = Fraction(c)
    return Fraction(1, 4) * (Fraction(3, 4) + c / 4) ** d * s


# --------------------------------------------------------------------------
# well-distributed samples


@dataclass
class WellDistributed:
    ok: bool
    witness: Restriction | None = None
    count: int | None = None
    expected: Fraction | None = None

    def __bool__(self):
        return self.ok


def well_distributed(S, c, d: int) -> WellDistributed:
    """Check | |S_alpha| - mu | <= c mu, mu = 2^-|alpha| |S|, for every |alpha| <= d."""
    view = as_view(S)
    n = view.n
    if d > n:
        raise ValueError(f"depth {d} exceeds n={n}")
    c = Fraction(c)
    if c < 0:
        raise ValueError("c must be non-negative")
    idx = view.entries()
    pts = view.store.points[idx]
    w = view.store.weights[idx]
    total = int(w.sum())
    bits = np.stack([(pts >> j) & 1 for j in range(n)], axis=1) if n else np.zeros((len(pts), 0), np.int64)
    for size_ in range(0, d + 1):
        weights = 1 << np.arange(size_, dtype=np.int64)
        for A in combinations(range(n), size_):
            key = bits[:, list(A)] @ weights if size_ else np.zeros(len(pts), np.int64)
            counts = np.bincount(key, weights=w, minlength=1 << size_).astype(np.int64)
            # |count - total/2^k| <= c total/2^k  <=>  |count 2^k - total| <= c total
            dev = np.abs(counts * (1 << size_) - total)
            bad = np.flatnonzero(dev > c * total) if c.denominator == 1 else np.flatnonzero(
                dev * c.denominator > c.numerator * total
            )
            if len(bad):
                a = int(bad[0])
                alpha = Restriction(tuple((A[j] + 1, (a >> j) & 1) for j in range(size_)))
                return WellDistributed(False, alpha, int(counts[a]), Fraction(total, 1 << size_))
    return WellDistributed(True)


# --------------------------------------------------------------------------
# sample sizes and the learning pipeline


def wd_sample_size(c, d: int, n: int, delta) -> int:
    """ceil(3 2^d / c^2 (d ln(2n) + ln(2/delta)))."""
    c, delta = float(c), float(delta)
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    return math.ceil(3 * 2**d / c**2 * (d * math.log(2 * n) + math.log(2 / delta)))


def generalization_sample_size(d: int, n: int, eps, delta) -> int:
    """ceil(32/(9 eps) (2^d ln(n+3) + ln(1/delta)))."""
    eps, delta = float(eps), float(delta)
    return math.ceil(32 / (9 * eps) * (2**d * math.log(n + 3) + math.log(1 / delta)))


PROPER_C = Fraction(1, 2)


def proper_depth(s: int, eps, n: int, c=PROPER_C) -> int:
    """ceil(log2(s/eps) / -log2((3+c)/4)), clamped to [0, n]."""
    raw = math.log2(s / float(eps)) / -math.log2((3 + float(c)) / 4)
    return max(0, min(n, math.ceil(raw)))


@dataclass
class ProperReport:
    s: int
    eps: Fraction
    delta: Fraction
    c: Fraction
    d: int
    m: int
    well_distributed: bool | None = None
    witness: str | None = None
    found: bool = False
    sample_error: Fraction | None = None
    true_error: object = None
    calls: int = 0
    peak_frames: int = 0
    tree_depth: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "eps": str(self.eps),
            "delta": str(self.delta),
            "c": str(self.c),
            "d": self.d,
            "m": self.m,
            "well_distributed": self.well_distributed,
            "witness": self.witness,
            "found": self.found,
            "sample_error": None if self.sample_error is None else str(self.sample_error),
            "true_error": None if self.true_error is None else str(self.true_error),
            "calls": self.calls,
            "peak_frames": self.peak_frames,
            "tree_depth": self.tree_depth,
        }


def learn_proper(target, s: int, eps, delta, seed, c=PROPER_C, check_wd: bool = True):
    """Draw a uniform sample and fit it with FIND; returns (tree or None, report)."""
    oracle = as_oracle(target)
    table = getattr(oracle, "table", None)
    n = oracle.n
    eps, delta, c = Fraction(eps), Fraction(delta), Fraction(c)
    d = proper_depth(s, eps, n, c)
    m = max(wd_sample_size(c, d, n, delta), generalization_sample_size(d, n, eps, delta))
    sample = draw_examples(oracle, m, np.random.default_rng(seed))
    view = SampleView.of(sample)
    report = ProperReport(s, eps, delta, c, d, m)
    if check_wd:
        wd = well_distributed(view, c, d)
        report.well_distributed = wd.ok
        report.witness = None if wd.ok else str(wd.witness)
    res = find(view, s, d)
    report.calls, report.peak_frames = res.calls, res.peak_frames
    report.found = res.found
    if res.tree is None:
        return None, report
    report.sample_error = view.error_of(res.tree)
    report.tree_depth = depth(res.tree)
    if table is not None:
        report.true_error = table_error(to_truth_table(res.tree, n), table)
    return res.tree, report


# --------------------------------------------------------------------------
# sample file format


def dumps_sample(S: ExampleSample) -> str:
    """``n=<int>`` then ``<x_1 x_2 ... x_n as a bit string> <label>`` per example."""
    lines = [f"n={S.n}"]
    for x, y in zip(S.points, S.labels):
        bits = "".join(str((int(x) >> j) & 1) for j in range(S.n))
        lines.append(f"{bits} {int(y)}")
    return "\n".join(lines) + "\n"


def loads_sample(text: str) -> ExampleSample:
    lines = [
        (no, ln.strip())
        for no, ln in enumerate(text.splitlines(), start=1)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines or not lines[0][1].startswith("n="):
        raise ValueError("sample file must start with 'n=<int>'")
    try:
        n = int(lines[0][1][2:])
    except ValueError:
        raise ValueError(f"line {lines[0][0]}: bad header {lines[0][1]!r}") from None
    pts, labs = [], []
    for lineno, ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<bits> <label>'")
        bits, lab = parts
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise ValueError(f"line {lineno}: expected {n} bits, got {bits!r}")
        if lab not in ("1", "-1", "+1"):
            raise ValueError(f"line {lineno}: label must be 1 or -1")
        pts.append(sum(int(b) << j for j, b in enumerate(bits)))
        labs.append(int(lab))
    return ExampleSample(n, np.asarray(pts, np.int64), np.asarray(labs, np.int8), None, "file")
