"""Boolean functions on {0,1}^n as exact truth tables.

Conventions
-----------
* A point ``x`` is either an int index (coordinate ``i`` is bit ``i - 1``)
  or a sequence of ``n`` bits ``(x_1, ..., x_n)``.
* Output bit 1 means TRUE (+1), bit 0 means FALSE (-1).
* Every statistic is returned as an exact :class:`DyadicRational`.

Function families are built by whole-table bit algebra on the literal
tables ``x_i`` (a mux is ``(c & a) | (~c & b)``), which keeps even the
n = 26 constructions at a few dozen big-int passes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .dyadic import DyadicRational

MAX_N = 26


# --------------------------------------------------------------------------
# core types


def _table_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


@dataclass(frozen=True)
class TruthTable:
    """f : {0,1}^n -> {-1,+1} stored as the int ``bits`` of 2**n bits."""

    n: int
    bits: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_N:
            raise ValueError(f"n must be in [0, {MAX_N}], got {self.n}")
        if self.bits < 0 or self.bits >> (1 << self.n):
            raise ValueError(f"bits do not fit in a table of 2**{self.n} entries")

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def ones(self) -> int:
        """Number of points mapped to +1."""
        return self.bits.bit_count()

    def __call__(self, x) -> int:
        return evaluate(self, x)

    def __neg__(self) -> "TruthTable":
        return TruthTable(self.n, self.bits ^ _table_mask(self.n))

    def is_constant(self) -> bool:
        return self.bits == 0 or self.bits == _table_mask(self.n)


@dataclass(frozen=True)
class Restriction:
    """An ordered list of ``(coordinate, bit)`` assignments, coordinates distinct."""

    assignments: tuple = ()

    def __post_init__(self):
        pairs = tuple((int(i), int(b)) for i, b in self.assignments)
        seen = set()
        for i, b in pairs:
            if i < 1:
                raise ValueError(f"coordinates are 1-indexed, got {i}")
            if b not in (0, 1):
                raise ValueError(f"bit values must be 0 or 1, got {b}")
            if i in seen:
                raise ValueError(f"coordinate {i} assigned twice")
            seen.add(i)
        object.__setattr__(self, "assignments", pairs)

    def __len__(self):
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)

    def extend(self, i: int, b: int) -> "Restriction":
        return Restriction(self.assignments + ((i, b),))

    @property
    def coords(self) -> frozenset:
        return frozenset(i for i, _ in self.assignments)

    def value(self, i: int):
        for j, b in self.assignments:
            if j == i:
                return b
        return None

    def agrees(self, x: int) -> bool:
        """Does the point index ``x`` satisfy every assignment?"""
        return all(((x >> (i - 1)) & 1) == b for i, b in self.assignments)

    def bitstring(self) -> str:
        """The branch bits in path order; leftmost-leaf order compares these."""
        return "".join(str(b) for _, b in self.assignments)

    def to_json(self) -> list:
        return [[i, b] for i, b in self.assignments]

    def __str__(self):
        if not self.assignments:
            return "{}"
        return "{" + ", ".join(f"x{i}={b}" for i, b in self.assignments) + "}"


# --------------------------------------------------------------------------
# evaluation and restriction


def point_index(x, n: int) -> int:
    if isinstance(x, (int, np.integer)):
        x = int(x)
        if not 0 <= x < (1 << n):
            raise ValueError(f"point index {x} out of range for n={n}")
        return x
    x = list(x)
    if len(x) != n:
        raise ValueError(f"point has {len(x)} bits, expected {n}")
    idx = 0
    for j, b in enumerate(x):
        if b not in (0, 1):
            raise ValueError(f"point coordinates must be 0/1, got {b}")
        idx |= int(b) << j
    return idx


def point_bits(x: int, n: int) -> tuple:
    return tuple((x >> j) & 1 for j in range(n))


def evaluate(f: TruthTable, x) -> int:
    return 1 if (f.bits >> point_index(x, f.n)) & 1 else -1


def restrict(f: TruthTable, pi) -> TruthTable:
    """Fix the coordinates in ``pi``; the free coordinates keep their order."""
    if not isinstance(pi, Restriction):
        pi = Restriction(tuple(pi))
    for i, _ in pi:
        if i > f.n:
            raise ValueError(f"coordinate {i} out of range for n={f.n}")
    bits, n = f.bits, f.n
    # highest coordinate first so the lower indices stay put
    for i, b in sorted(pi, reverse=True):
        bits = kernels.restrict(bits, n, i, b)
        n -= 1
    return TruthTable(n, bits)


def restrict_one(f: TruthTable, i: int, b: int) -> TruthTable:
    if not 1 <= i <= f.n:
        raise ValueError(f"coordinate {i} out of range for n={f.n}")
    return TruthTable(f.n - 1, kernels.restrict(f.bits, f.n, i, b))


def free_coordinates(n: int, pi: Restriction) -> list[int]:
    """Original coordinates of a restricted table, in order."""
    fixed = pi.coords
    return [i for i in range(1, n + 1) if i not in fixed]


# --------------------------------------------------------------------------
# exact statistics


def influence_counts(f: TruthTable) -> list[int]:
    """Per coordinate, the number of sensitive edges (out of 2**(n-1))."""
    return kernels.influence_counts(f.bits, f.n)


def influence(f: TruthTable, i: int) -> DyadicRational:
    if not 1 <= i <= f.n:
        raise ValueError(f"coordinate {i} out of range for n={f.n}")
    return DyadicRational(influence_counts(f)[i - 1], f.n - 1)


def influences(f: TruthTable) -> list[DyadicRational]:
    return [DyadicRational(c, f.n - 1) for c in influence_counts(f)]


def total_influence(f: TruthTable) -> DyadicRational:
    if f.n == 0:
        return DyadicRational(0)
    return DyadicRational(sum(influence_counts(f)), f.n - 1)


def mean(f: TruthTable) -> DyadicRational:
    return DyadicRational(2 * f.ones - f.size, f.n)


def variance(f: TruthTable) -> DyadicRational:
    """4 Pr[f=-1] Pr[f=+1]."""
    ones = f.ones
    return DyadicRational(4 * ones * (f.size - ones), 2 * f.n)


def sensitivity(f: TruthTable, x) -> int:
    idx = point_index(x, f.n)
    v = (f.bits >> idx) & 1
    return sum(1 for j in range(f.n) if ((f.bits >> (idx ^ (1 << j))) & 1) != v)


def correlation(f: TruthTable, i: int) -> DyadicRational:
    """2 E[f(x) x_i] - E[f(x)] with x_i in {0,1}."""
    if not 1 <= i <= f.n:
        raise ValueError(f"coordinate {i} out of range for n={f.n}")
    pos1 = kernels.cofactor_counts(f.bits, f.n)[i - 1]
    pos0 = f.ones - pos1
    return DyadicRational(pos1 - pos0, f.n - 1)


def correlations(f: TruthTable) -> list[DyadicRational]:
    ones = f.ones
    return [DyadicRational(2 * c - ones, f.n - 1) for c in kernels.cofactor_counts(f.bits, f.n)]


def error(f: TruthTable, g: TruthTable) -> DyadicRational:
    if f.n != g.n:
        raise ValueError(f"arity mismatch: {f.n} vs {g.n}")
    return DyadicRational((f.bits ^ g.bits).bit_count(), f.n)


def error_pm1(f: TruthTable) -> DyadicRational:
    ones = f.ones
    return DyadicRational(min(ones, f.size - ones), f.n)


def is_monotone(f: TruthTable) -> bool:
    return kernels.is_monotone(f.bits, f.n)


def relevant_coordinates(f: TruthTable) -> list[int]:
    mask = kernels.relevant_mask(f.bits, f.n)
    return [i for i in range(1, f.n + 1) if (mask >> (i - 1)) & 1]


# --------------------------------------------------------------------------
# table algebra over literals


def _check_n(n: int):
    if n > MAX_N:
        raise ValueError(f"function needs n={n} variables, cap is {MAX_N}")
    if n < 0:
        raise ValueError("n must be non-negative")


def literal_bits(n: int, i: int) -> int:
    """Table of the literal x_i over n variables."""
    if not 1 <= i <= n:
        raise ValueError(f"coordinate {i} out of range for n={n}")
    if n < 3:
        return sum(1 << x for x in range(1 << n) if (x >> (i - 1)) & 1)
    nbytes = 1 << (n - 3)
    if i <= 3:
        raw = bytes([(0xAA, 0xCC, 0xF0)[i - 1]]) * nbytes
    else:
        half = 1 << (i - 4)
        raw = (b"\x00" * half + b"\xff" * half) * (nbytes // (2 * half))
    return int.from_bytes(raw, "little")


class _Algebra:
    """Bitwise boolean algebra on tables over a fixed n."""

    def __init__(self, n: int):
        _check_n(n)
        self.n = n
        self.full = _table_mask(n)
        self._lits: dict[int, int] = {}

    def lit(self, i: int) -> int:
        t = self._lits.get(i)
        if t is None:
            t = self._lits[i] = literal_bits(self.n, i)
        return t

    def neg(self, a: int) -> int:
        return a ^ self.full

    def mux(self, c: int, a: int, b: int) -> int:
        """``a`` where ``c`` holds, ``b`` elsewhere."""
        return (c & a) | (b & ~c & self.full)

    def conj(self, coords: Iterable[int]) -> int:
        out = self.full
        for i in coords:
            out &= self.lit(i)
        return out

    def disj(self, coords: Iterable[int]) -> int:
        out = 0
        for i in coords:
            out |= self.lit(i)
        return out

    def parity(self, coords: Sequence[int]) -> int:
        out = 0
        for i in coords:
            out ^= self.lit(i)
        return out

    def exact_counts(self, coords: Sequence[int], upto: int) -> list[int]:
        """``E[j]`` = points where exactly j of ``coords`` are 1, for j <= upto."""
        E = [self.full] + [0] * upto
        for i in coords:
            x = self.lit(i)
            nx = x ^ self.full
            for j in range(upto, 0, -1):
                E[j] = (E[j] & nx) | (E[j - 1] & x)
            E[0] &= nx
        return E

    def threshold_le(self, coords: Sequence[int], t: int) -> int:
        out = 0
        for e in self.exact_counts(coords, min(t, len(coords))):
            out |= e
        return out

    def majority(self, coords: Sequence[int]) -> int:
        k = len(coords)
        return self.neg(self.threshold_le(coords, k // 2))

    def dnf(self, terms: Iterable[Sequence[int]]) -> int:
        out = 0
        for term in terms:
            out |= self.conj(term)
        return out


# --------------------------------------------------------------------------
# basic generators


def constant(value: int, n: int) -> TruthTable:
    if value not in (1, -1):
        raise ValueError("constant value must be +1 or -1")
    _check_n(n)
    return TruthTable(n, _table_mask(n) if value == 1 else 0)


def dictator(n: int, i: int) -> TruthTable:
    return TruthTable(n, literal_bits(n, i))


def parity(k: int, n: int | None = None, coords: Sequence[int] | None = None) -> TruthTable:
    """XOR of ``coords`` (default 1..k); zero ones maps to -1."""
    n = k if n is None else n
    coords = list(range(1, k + 1)) if coords is None else list(coords)
    return TruthTable(n, _Algebra(n).parity(coords))


def majority(k: int) -> TruthTable:
    """+1 iff strictly more than half of the k inputs are 1."""
    if k < 1:
        raise ValueError("majority needs k >= 1")
    alg = _Algebra(k)
    return TruthTable(k, alg.majority(range(1, k + 1)))


def threshold(ell: int, t: int) -> TruthTable:
    """+1 iff at most ``t`` of the ``ell`` inputs are 1."""
    if ell < 1 or not 0 <= t <= ell:
        raise ValueError("threshold needs ell >= 1 and 0 <= t <= ell")
    alg = _Algebra(ell)
    return TruthTable(ell, alg.threshold_le(range(1, ell + 1), t))


def conjunction(k: int) -> TruthTable:
    return TruthTable(k, _Algebra(k).conj(range(1, k + 1)))


def disjunction(k: int) -> TruthTable:
    return TruthTable(k, _Algebra(k).disj(range(1, k + 1)))


def tribes_acceptance(width: int, terms: int) -> DyadicRational:
    """Pr[OR of ``terms`` disjoint ANDs of ``width`` bits] = 1 - (1 - 2^-w)^t."""
    miss = Fraction(2**width - 1, 2**width) ** terms
    return DyadicRational.coerce(1 - miss)


def tribes_width(r: int) -> int:
    """Largest w <= r with (1 - 2^-w)^floor(r/w) <= 1/2."""
    if r < 1:
        raise ValueError("tribes needs r >= 1")
    best = 1
    for w in range(1, r + 1):
        if Fraction(2**w - 1, 2**w) ** (r // w) <= Fraction(1, 2):
            best = w
    return best


def biased_tribes_width(ell: int, delta) -> int:
    """Width in [1, ell] whose acceptance is closest to ``delta``; ties to the smaller w."""
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if ell < 1:
        raise ValueError("biased tribes needs ell >= 1")
    best, gap = None, None
    for w in range(1, ell + 1):
        g = abs(tribes_acceptance(w, ell // w).to_fraction() - delta)
        if gap is None or g < gap:
            best, gap = w, g
    return best


def tribes_terms(coords: Sequence[int], width: int) -> list[list[int]]:
    t = len(coords) // width
    return [list(coords[j * width:(j + 1) * width]) for j in range(t)]


def tribes(r: int) -> TruthTable:
    w = tribes_width(r)
    alg = _Algebra(r)
    return TruthTable(r, alg.dnf(tribes_terms(range(1, r + 1), w)))


def tribes_biased(ell: int, delta, side: str = "delta") -> TruthTable:
    """Read-once DNF on ``ell`` bits tuned toward acceptance ``delta`` (or ``1 - delta``)."""
    target = _side_target(delta, side)
    w = biased_tribes_width(ell, target)
    alg = _Algebra(ell)
    return TruthTable(ell, alg.dnf(tribes_terms(range(1, ell + 1), w)))


def _side_target(delta, side: str) -> Fraction:
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if side == "delta":
        return delta
    if side == "complement":
        return 1 - delta
    raise ValueError(f"side must be 'delta' or 'complement', got {side!r}")


# --------------------------------------------------------------------------
# composed families


@dataclass(frozen=True)
class FamilyParams:
    h: int
    ell: int = 2
    k: int = 1
    r: int = 1
    delta: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.h < 0:
            raise ValueError("h must be non-negative")
        for name in ("ell", "k", "r"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    def to_json(self) -> dict:
        return {"h": self.h, "ell": self.ell, "k": self.k, "r": self.r, "delta": str(self.delta)}


@dataclass(frozen=True)
class Block:
    role: str  # "x", "y" or "z"
    level: int  # 0 for z
    part: int  # 1 or 2 for the two x-blocks of the monotone approx family, else 0
    coords: tuple

    @property
    def name(self) -> str:
        if self.role == "z":
            return "z"
        if self.part:
            return f"{self.role}({self.level},{self.part})"
        return f"{self.role}({self.level})"


@dataclass(frozen=True)
class Layout:
    """Which coordinates hold which block of a composed family."""

    family: str
    params: FamilyParams
    n: int
    blocks: tuple = field(default_factory=tuple)

    def block(self, role: str, level: int = 0, part: int = 0) -> Block:
        for b in self.blocks:
            if b.role == role and b.level == level and b.part == part:
                return b
        raise KeyError(f"no block {role}({level},{part}) in {self.family}")

    def coords(self, role: str, level: int = 0, part: int = 0) -> tuple:
        return self.block(role, level, part).coords

    @property
    def z_coords(self) -> frozenset:
        return frozenset(self.block("z").coords)

    def name_of(self, i: int) -> str:
        for b in self.blocks:
            if i in b.coords:
                if len(b.coords) == 1:
                    return b.name
                return f"{b.name}_{b.coords.index(i) + 1}"
        raise KeyError(i)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params": self.params.to_json(),
            "n": self.n,
            "blocks": [
                {"name": b.name, "role": b.role, "level": b.level, "part": b.part, "coords": list(b.coords)}
                for b in self.blocks
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


FAMILIES = ("exact-nonmonotone", "exact-monotone", "approx-nonmonotone", "approx-monotone")


def _family_shape(family: str, p: FamilyParams):
    """(x block widths per level, y width, z width)."""
    if family == "exact-nonmonotone":
        return [2], 1, 1
    if family == "exact-monotone":
        return [4], 1, 1
    if family == "approx-nonmonotone":
        return [p.ell], p.k, p.r
    if family == "approx-monotone":
        return [p.ell, p.ell], p.k, p.r
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def family_n(family: str, p: FamilyParams) -> int:
    xs, ky, rz = _family_shape(family, p)
    return p.h * (sum(xs) + ky) + rz


def family_layout(family: str, p: FamilyParams) -> Layout:
    """x-blocks for levels h..1, then y-blocks h..1, then z."""
    xs, ky, rz = _family_shape(family, p)
    n = family_n(family, p)
    blocks = []
    nxt = 1

    def take(width):
        nonlocal nxt
        out = tuple(range(nxt, nxt + width))
        nxt += width
        return out

    for level in range(p.h, 0, -1):
        for part, width in enumerate(xs, start=1):
            blocks.append(Block("x", level, part if len(xs) > 1 else 0, take(width)))
    for level in range(p.h, 0, -1):
        blocks.append(Block("y", level, 0, take(ky)))
    blocks.append(Block("z", 0, 0, take(rz)))
    return Layout(family, p, n, tuple(blocks))


def _x(layout: Layout, level: int, part: int = 0):
    return layout.coords("x", level, part)


def family_table(family: str, p: FamilyParams) -> tuple[TruthTable, Layout]:
    layout = family_layout(family, p)
    n = layout.n
    _check_n(n)
    alg = _Algebra(n)
    z = layout.coords("z")
    if family in ("exact-nonmonotone", "exact-monotone"):
        f = alg.lit(z[0])
    else:
        f = alg.dnf(tribes_terms(z, tribes_width(len(z))))
    for level in range(1, p.h + 1):
        y = layout.coords("y", level)
        if family == "exact-nonmonotone":
            x1, x2 = _x(layout, level)
            cond = alg.lit(x1) | alg.lit(x2)
            f = alg.mux(cond, alg.lit(y[0]), f)
        elif family == "exact-monotone":
            a, b, c, d = (alg.lit(i) for i in _x(layout, level))
            na, nb = alg.neg(a), alg.neg(b)
            cd = c & d
            eq = na & nb & cd
            above = cd & (a | b)
            below = na & nb & alg.neg(cd)
            other = alg.neg(eq | above | below)
            f = (eq & f) | above | (other & alg.lit(y[0]))
        elif family == "approx-nonmonotone":
            cond = alg.threshold_le(_x(layout, level), 1)
            f = alg.mux(cond, alg.parity(y), f)
        else:
            xa, xb = _x(layout, level, 1), _x(layout, level, 2)
            A = alg.dnf(tribes_terms(xa, biased_tribes_width(p.ell, p.delta)))
            B = alg.dnf(tribes_terms(xb, biased_tribes_width(p.ell, 1 - p.delta)))
            nA, nB = alg.neg(A), alg.neg(B)
            f = (nA & B & f) | (A & nB & alg.majority(y)) | (A & B)
    return TruthTable(n, f), layout


def family_exact_nonmonotone(h: int) -> TruthTable:
    return family_table("exact-nonmonotone", FamilyParams(h))[0]


def family_exact_monotone(h: int) -> TruthTable:
    return family_table("exact-monotone", FamilyParams(h))[0]


def family_approx_nonmonotone(p: FamilyParams) -> TruthTable:
    return family_table("approx-nonmonotone", p)[0]


def family_approx_monotone(p: FamilyParams) -> TruthTable:
    return family_table("approx-monotone", p)[0]


# --------------------------------------------------------------------------
# pointwise reference evaluators (independent of the table algebra)


def _ref_tribes(bits: Sequence[int], width: int) -> bool:
    t = len(bits) // width
    return any(all(bits[j * width:(j + 1) * width]) for j in range(t))


def reference_eval(family: str, p: FamilyParams, x) -> int:
    """Evaluate the inductive definition directly at one point."""
    layout = family_layout(family, p)
    xb = point_bits(point_index(x, layout.n), layout.n)

    def get(coords):
        return [xb[i - 1] for i in coords]

    def rec(h: int) -> bool:
        if h == 0:
            z = get(layout.coords("z"))
            if family.startswith("exact"):
                return bool(z[0])
            return _ref_tribes(z, tribes_width(len(z)))
        y = get(layout.coords("y", h))
        if family == "exact-nonmonotone":
            x1, x2 = get(_x(layout, h))
            return bool(y[0]) if (x1 or x2) else rec(h - 1)
        if family == "exact-monotone":
            xs = tuple(get(_x(layout, h)))
            star = (0, 0, 1, 1)
            if xs == star:
                return rec(h - 1)
            if all(a >= b for a, b in zip(xs, star)):
                return True
            if all(a <= b for a, b in zip(xs, star)):
                return False
            return bool(y[0])
        if family == "approx-nonmonotone":
            if sum(get(_x(layout, h))) <= 1:
                return sum(y) % 2 == 1
            return rec(h - 1)
        A = _ref_tribes(get(_x(layout, h, 1)), biased_tribes_width(p.ell, p.delta))
        B = _ref_tribes(get(_x(layout, h, 2)), biased_tribes_width(p.ell, 1 - p.delta))
        if not A and not B:
            return False
        if not A and B:
            return rec(h - 1)
        if A and not B:
            return 2 * sum(y) > len(y)
        return True

    return 1 if rec(p.h) else -1


def table_from_callable(n: int, fn) -> TruthTable:
    """Brute-force a table from a pointwise ±1 function (desk scale only)."""
    _check_n(n)
    bits = 0
    for x in range(1 << n):
        if fn(x) == 1:
            bits |= 1 << x
    return TruthTable(n, bits)


# --------------------------------------------------------------------------
# random functions


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_tree_shape(n: int, s: int, rng) -> object:
    """A random decision tree with (at most) ``s`` leaves over n variables.

    Repeatedly splits a uniformly random leaf whose path has not used every
    variable, on a uniformly random unused variable; leaves get random
    labels. Returns nested tuples ``(var, t0, t1)`` with ±1 leaves.
    """
    rng = as_rng(rng)
    if s < 1:
        raise ValueError("tree size must be at least 1")
    leaves = [()]  # each leaf is its path: tuple of (var, bit)
    while len(leaves) < s:
        open_ = [j for j, path in enumerate(leaves) if len(path) < n]
        if not open_:
            break
        j = open_[int(rng.integers(len(open_)))]
        path = leaves[j]
        used = {v for v, _ in path}
        free = [v for v in range(1, n + 1) if v not in used]
        v = free[int(rng.integers(len(free)))]
        leaves[j:j + 1] = [path + ((v, 0),), path + ((v, 1),)]
    labels = rng.choice(np.array([-1, 1]), size=len(leaves))

    def build(prefix):
        for j, path in enumerate(leaves):
            if path == prefix:
                return int(labels[j])
        v = next(p[len(prefix)][0] for p in leaves if p[:len(prefix)] == prefix and len(p) > len(prefix))
        return (v, build(prefix + ((v, 0),)), build(prefix + ((v, 1),)))

    return build(())


def shape_table(shape, n: int) -> TruthTable:
    alg = _Algebra(n)

    def rec(t):
        if not isinstance(t, tuple):
            return alg.full if t == 1 else 0
        v, t0, t1 = t
        return alg.mux(alg.lit(v), rec(t1), rec(t0))

    return TruthTable(n, rec(shape))


def random_tree_function(n: int, s: int, seed) -> TruthTable:
    return shape_table(random_tree_shape(n, s, seed), n)


def random_monotone_function(n: int, seed, max_terms: int = 4, max_width: int = 3) -> TruthTable:
    """A random monotone DNF or CNF with 1..max_terms terms of width 1..max_width."""
    rng = as_rng(seed)
    alg = _Algebra(n)
    m = int(rng.integers(1, max_terms + 1))
    terms = []
    for _ in range(m):
        w = int(rng.integers(1, min(max_width, n) + 1))
        terms.append([int(v) for v in rng.choice(np.arange(1, n + 1), size=w, replace=False)])
    if rng.random() < 0.5:
        bits = alg.dnf(terms)
    else:
        bits = alg.full
        for term in terms:
            bits &= alg.disj(term)
    return TruthTable(n, bits)


# --------------------------------------------------------------------------
# truth-table file format


def dumps_table(f: TruthTable) -> str:
    """``n=<int>`` then the hex digits, digit j holding bits 4j..4j+3 (LSB first)."""
    digits = max(1, f.size // 4)
    return f"n={f.n}\n" + format(f.bits, "x").zfill(digits)[::-1] + "\n"


def loads_table(text: str) -> TruthTable:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError("truth-table file must start with 'n=<int>'")
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise ValueError(f"bad header {lines[0]!r}") from None
    body = "".join(lines[1:])
    digits = max(1, (1 << n) // 4)
    if len(body) != digits:
        raise ValueError(f"expected {digits} hex digits for n={n}, got {len(body)}")
    try:
        bits = int(body[::-1], 16)
    except ValueError:
        raise ValueError("table body must be hexadecimal") from None
    return TruthTable(n, bits)
