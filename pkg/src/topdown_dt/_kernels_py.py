"""Pure-Python bitset kernels.

A truth table over n variables is a Python int of 2**n bits; bit ``x``
holds f(x), with coordinate ``i`` (1-indexed) stored in bit ``i - 1`` of
the index ``x``. CPython big-int bitwise ops run in C, so each kernel below
is a handful of whole-table passes rather than a per-point loop.

:mod:`topdown_dt._kernels` is a compiled drop-in replacement for these
functions; :mod:`topdown_dt.kernels` picks one at import time.
"""

from __future__ import annotations

from functools import lru_cache

BACKEND = "python"
ORACLE_MAX_N = 16


@lru_cache(maxsize=None)
def _periodic(width: int, offset: int, period: int, total: int) -> int:
    """Bits ``[offset, offset + width)`` repeated every ``period`` bits, ``total`` wide."""
    m = ((1 << width) - 1) << offset
    length = period
    while length < total:
        m |= m << length
        length <<= 1
    return m & ((1 << total) - 1)


def low_mask(n: int, i: int) -> int:
    """Positions ``x < 2**n`` whose coordinate ``i`` is 0."""
    half = 1 << (i - 1)
    return _periodic(half, 0, half << 1, 1 << n)


def full_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


def influence_counts(bits: int, n: int) -> list[int]:
    """Per coordinate, the number of edges ``{x, x^i}`` on which f changes."""
    out = []
    for i in range(1, n + 1):
        m = low_mask(n, i)
        out.append(((bits ^ (bits >> (1 << (i - 1)))) & m).bit_count())
    return out


def cofactor_counts(bits: int, n: int) -> list[int]:
    """Per coordinate, the number of ones of f with ``x_i = 1``."""
    return [(bits & ~low_mask(n, i)).bit_count() for i in range(1, n + 1)]


def relevant_mask(bits: int, n: int) -> int:
    r = 0
    for i in range(1, n + 1):
        s = 1 << (i - 1)
        if (bits ^ (bits >> s)) & low_mask(n, i):
            r |= 1 << (i - 1)
    return r


def restrict(bits: int, n: int, i: int, b: int) -> int:
    """Fix coordinate ``i`` to ``b``; the result is a table over n - 1 variables."""
    total = 1 << n
    chunk = 1 << (i - 1)
    g = (bits >> (chunk if b else 0)) & low_mask(n, i)
    # squeeze out the gaps left by the dropped coordinate, doubling chunk width each pass
    while 2 * chunk < total:
        keep = _periodic(chunk, 0, 4 * chunk, total)
        move = _periodic(chunk, chunk, 4 * chunk, total)
        g = (g & keep) | ((g >> chunk) & move)
        chunk <<= 1
    return g


def is_monotone(bits: int, n: int) -> bool:
    for i in range(1, n + 1):
        m = low_mask(n, i)
        lo = bits & m
        hi = (bits >> (1 << (i - 1))) & m
        if lo & ~hi:
            return False
    return True


def _canonical(bits: int, n: int) -> tuple[int, int]:
    rel = relevant_mask(bits, n)
    for i in range(n, 0, -1):
        if not (rel >> (i - 1)) & 1:
            bits = restrict(bits, n, i, 0)
            n -= 1
    if bits & 1:
        bits ^= full_mask(n)
    return bits, n


def optimal_size(bits: int, n: int) -> int:
    """Minimum leaf count of a decision tree computing the table exactly."""
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle supports n <= {ORACLE_MAX_N}, got {n}")
    memo: dict[tuple[int, int], int] = {}

    def rec(bits: int, n: int) -> int:
        bits, n = _canonical(bits, n)
        if bits == 0:
            return 1
        if n == 1:
            return 2
        key = (n, bits)
        hit = memo.get(key)
        if hit is not None:
            return hit
        floor = n + 1  # every relevant variable needs its own internal node
        best = 1 << n
        for i in range(1, n + 1):
            f0 = restrict(bits, n, i, 0)
            f1 = restrict(bits, n, i, 1)
            a = rec(f0, n - 1)
            if a + 1 >= best:
                continue
            lb1 = relevant_mask(f1, n - 1).bit_count() + 1
            if a + lb1 >= best:
                continue
            total = a + rec(f1, n - 1)
            if total < best:
                best = total
                if best == floor:
                    break
        memo[key] = best
        return best

    return rec(bits, n)


def optimal_depth(bits: int, n: int) -> int:
    """Minimum depth of a decision tree computing the table exactly."""
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle supports n <= {ORACLE_MAX_N}, got {n}")
    memo: dict[tuple[int, int], int] = {}

    def rec(bits: int, n: int) -> int:
        bits, n = _canonical(bits, n)
        if bits == 0:
            return 0
        if n == 1:
            return 1
        key = (n, bits)
        hit = memo.get(key)
        if hit is not None:
            return hit
        # a depth-d tree has at most 2**d - 1 internal nodes
        floor = n.bit_length()
        best = n
        for i in range(1, n + 1):
            a = rec(restrict(bits, n, i, 0), n - 1)
            if a + 1 >= best:
                continue
            b = rec(restrict(bits, n, i, 1), n - 1)
            best = min(best, 1 + max(a, b))
            if best == floor:
                break
        memo[key] = best
        return best

    return rec(bits, n)


def find_core(sample: int, s: int, d: int, n: int, columns, positives: int, weight_planes):
    """Recursive proper-learning search over bitsets of distinct sample points.

    ``columns[v]`` is the set of points with ``x_v = 1`` (index 0 unused),
    ``positives`` the set labelled +1, and ``weight_planes[b]`` the set of
    points whose multiplicity has bit ``b`` set. Returns ``(tree, calls,
    peak_frames)`` where ``tree`` is ``None``, ``("leaf", ±1)`` or
    ``(v, tree0, tree1)``.
    """
    calls = 0
    active = 0
    peak = 0

    def weight(m: int) -> int:
        return sum((m & p).bit_count() << b for b, p in enumerate(weight_planes))

    def rec(S: int, s: int, d: int):
        nonlocal calls, active, peak
        calls += 1
        active += 1
        if active > peak:
            peak = active
        try:
            P = S & positives
            if P == S:
                return ("leaf", 1)
            if P == 0:
                return ("leaf", -1)
            if s <= 1:
                return None
            if d == 0:
                return ("leaf", 1 if weight(P) >= weight(S ^ P) else -1)
            half = s // 2
            for v in range(1, n + 1):
                S1 = S & columns[v]
                if S1 == 0 or S1 == S:
                    continue
                S0 = S ^ S1
                t0 = rec(S0, half, d - 1)
                t1 = rec(S1, half, d - 1)
                if t0 is not None and t1 is not None:
                    return (v, t0, t1)
                if t0 is None and t1 is None:
                    continue
                if t0 is None:
                    t0 = rec(S0, s - 1, d - 1)
                else:
                    t1 = rec(S1, s - 1, d - 1)
                if t0 is None or t1 is None:
                    return None
                return (v, t0, t1)
            return None
        finally:
            active -= 1

    tree = rec(sample, s, d)
    return tree, calls, peak
