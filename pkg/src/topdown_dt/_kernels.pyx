# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled bitset kernels; same contract as :mod:`topdown_dt._kernels_py`.

Tables cross the boundary as Python ints and are unpacked into 64-bit
words (little-endian) for single-pass popcount loops.
"""

from libc.stdint cimport uint64_t
from libcpp.vector cimport vector
from libcpp.string cimport string
from libcpp.unordered_map cimport unordered_map

BACKEND = "compiled"
ORACLE_MAX_N = 16

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

ctypedef unordered_map[string, int] Memo

# positions whose coordinate i (i = 1..6) is 0, within one word
cdef uint64_t LOW[6]
LOW[0] = 0x5555555555555555ULL
LOW[1] = 0x3333333333333333ULL
LOW[2] = 0x0F0F0F0F0F0F0F0FULL
LOW[3] = 0x00FF00FF00FF00FFULL
LOW[4] = 0x0000FFFF0000FFFFULL
LOW[5] = 0x00000000FFFFFFFFULL

# compaction masks for chunk widths 1, 2, 4, 8, 16
cdef uint64_t KEEP[5]
cdef uint64_t MOVE[5]
KEEP[0] = 0x1111111111111111ULL
MOVE[0] = 0x2222222222222222ULL
KEEP[1] = 0x0303030303030303ULL
MOVE[1] = 0x0C0C0C0C0C0C0C0CULL
KEEP[2] = 0x000F000F000F000FULL
MOVE[2] = 0x00F000F000F000F0ULL
KEEP[3] = 0x000000FF000000FFULL
MOVE[3] = 0x0000FF000000FF00ULL
KEEP[4] = 0x000000000000FFFFULL
MOVE[4] = 0x00000000FFFF0000ULL


cdef inline Py_ssize_t nwords(int n) noexcept nogil:
    if n <= 6:
        return 1
    return (<Py_ssize_t>1) << (n - 6)


cdef inline uint64_t valid(int n) noexcept nogil:
    if n >= 6:
        return 0xFFFFFFFFFFFFFFFFULL
    return ((<uint64_t>1) << (1 << n)) - 1


cdef vector[uint64_t] unpack(object bits, int n) except *:
    cdef Py_ssize_t W = nwords(n)
    cdef bytes raw = (<object>bits).to_bytes(W * 8, "little")
    cdef const char* p = raw
    cdef vector[uint64_t] w
    w.resize(W)
    cdef Py_ssize_t k
    cdef const uint64_t* q = <const uint64_t*>p
    for k in range(W):
        w[k] = q[k]
    return w


cdef object pack(const uint64_t* w, int n):
    cdef Py_ssize_t W = nwords(n)
    cdef bytes raw = (<const char*>w)[:W * 8]
    return int.from_bytes(raw, "little")


cdef long long influence_one(const uint64_t* w, int n, int i) noexcept nogil:
    cdef Py_ssize_t W = nwords(n), k, base, ws
    cdef long long c = 0
    cdef uint64_t m
    cdef int sh
    if i <= 6:
        sh = 1 << (i - 1)
        m = LOW[i - 1] & valid(n)
        for k in range(W):
            c += __builtin_popcountll((w[k] ^ (w[k] >> sh)) & m)
    else:
        ws = (<Py_ssize_t>1) << (i - 7)
        base = 0
        while base < W:
            for k in range(ws):
                c += __builtin_popcountll(w[base + k] ^ w[base + k + ws])
            base += 2 * ws
    return c


cdef bint is_relevant(const uint64_t* w, int n, int i) noexcept nogil:
    cdef Py_ssize_t W = nwords(n), k, base, ws
    cdef uint64_t m
    cdef int sh
    if i <= 6:
        sh = 1 << (i - 1)
        m = LOW[i - 1] & valid(n)
        for k in range(W):
            if (w[k] ^ (w[k] >> sh)) & m:
                return True
    else:
        ws = (<Py_ssize_t>1) << (i - 7)
        base = 0
        while base < W:
            for k in range(ws):
                if w[base + k] != w[base + k + ws]:
                    return True
            base += 2 * ws
    return False


cdef inline uint64_t compact(uint64_t x, int i) noexcept nogil:
    cdef int c = i - 1
    while c < 5:
        x = (x & KEEP[c]) | ((x >> (1 << c)) & MOVE[c])
        c += 1
    return x


cdef void restrict_words(const uint64_t* w, int n, int i, int b, uint64_t* out) noexcept nogil:
    cdef Py_ssize_t W = nwords(n), Wout = nwords(n - 1), k, base, ws, o, src
    cdef int sh
    cdef uint64_t lo, hi
    if i >= 7:
        ws = (<Py_ssize_t>1) << (i - 7)
        o = 0
        base = 0
        while base < W:
            src = base + (ws if b else 0)
            for k in range(ws):
                out[o] = w[src + k]
                o += 1
            base += 2 * ws
        return
    sh = (1 << (i - 1)) if b else 0
    if n <= 6:
        out[0] = compact((w[0] >> sh) & LOW[i - 1] & valid(n), i) & valid(n - 1)
        return
    for k in range(Wout):
        lo = compact((w[2 * k] >> sh) & LOW[i - 1], i)
        hi = compact((w[2 * k + 1] >> sh) & LOW[i - 1], i)
        out[k] = lo | (hi << 32)


def influence_counts(bits, int n):
    cdef vector[uint64_t] w = unpack(bits, n)
    return [influence_one(w.data(), n, i) for i in range(1, n + 1)]


def cofactor_counts(bits, int n):
    cdef vector[uint64_t] w = unpack(bits, n)
    cdef Py_ssize_t W = nwords(n), k, base, ws
    cdef long long c
    cdef uint64_t m
    out = []
    for i in range(1, n + 1):
        c = 0
        if i <= 6:
            m = (~LOW[i - 1]) & valid(n)
            for k in range(W):
                c += __builtin_popcountll(w[k] & m)
        else:
            ws = (<Py_ssize_t>1) << (i - 7)
            base = 0
            while base < W:
                for k in range(ws):
                    c += __builtin_popcountll(w[base + ws + k])
                base += 2 * ws
        out.append(c)
    return out


def relevant_mask(bits, int n):
    cdef vector[uint64_t] w = unpack(bits, n)
    r = 0
    for i in range(1, n + 1):
        if is_relevant(w.data(), n, i):
            r |= 1 << (i - 1)
    return r


def restrict(bits, int n, int i, int b):
    cdef vector[uint64_t] w = unpack(bits, n)
    cdef vector[uint64_t] out
    out.resize(nwords(n - 1))
    restrict_words(w.data(), n, i, b, out.data())
    return pack(out.data(), n - 1)


def is_monotone(bits, int n):
    cdef vector[uint64_t] w = unpack(bits, n)
    cdef Py_ssize_t W = nwords(n), k, base, ws
    cdef uint64_t m
    cdef int sh, i
    for i in range(1, n + 1):
        if i <= 6:
            sh = 1 << (i - 1)
            m = LOW[i - 1] & valid(n)
            for k in range(W):
                if (w[k] & m) & ~(w[k] >> sh):
                    return False
        else:
            ws = (<Py_ssize_t>1) << (i - 7)
            base = 0
            while base < W:
                for k in range(ws):
                    if w[base + k] & ~w[base + k + ws]:
                        return False
                base += 2 * ws
    return True


# ---------------------------------------------------------------- oracle

cdef int canonical(vector[uint64_t]& f, int n) noexcept nogil:
    """Drop irrelevant coordinates and fix f(0) = 0 (negation symmetry); returns new n."""
    cdef vector[uint64_t] tmp
    cdef int i
    cdef Py_ssize_t k
    i = n
    while i >= 1:
        if not is_relevant(f.data(), n, i):
            tmp.resize(nwords(n - 1))
            restrict_words(f.data(), n, i, 0, tmp.data())
            f.swap(tmp)
            n -= 1
        i -= 1
    f.resize(nwords(n))
    if f[0] & 1:
        for k in range(nwords(n)):
            f[k] = ~f[k]
        f[0] &= valid(n)
    return n


cdef inline bint is_zero(vector[uint64_t]& f) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(<Py_ssize_t>f.size()):
        if f[k]:
            return False
    return True


cdef inline string make_key(vector[uint64_t]& f, int n):
    cdef string key
    key.push_back(<char>n)
    key.append(<const char*>f.data(), f.size() * 8)
    return key


cdef int relevant_count(vector[uint64_t]& f, int n) noexcept nogil:
    cdef int c = 0, i
    for i in range(1, n + 1):
        if is_relevant(f.data(), n, i):
            c += 1
    return c


cdef int opt_size(vector[uint64_t] f, int n, Memo& memo):
    n = canonical(f, n)
    if is_zero(f):
        return 1
    if n == 1:
        return 2
    cdef string key = make_key(f, n)
    if memo.count(key):
        return memo[key]
    cdef int floor = n + 1
    cdef long long best = (<long long>1) << n
    cdef int i, a, lb1
    cdef long long total
    cdef vector[uint64_t] f0, f1
    f0.resize(nwords(n - 1))
    f1.resize(nwords(n - 1))
    for i in range(1, n + 1):
        restrict_words(f.data(), n, i, 0, f0.data())
        restrict_words(f.data(), n, i, 1, f1.data())
        a = opt_size(f0, n - 1, memo)
        if a + 1 >= best:
            continue
        lb1 = relevant_count(f1, n - 1) + 1
        if a + lb1 >= best:
            continue
        total = a + opt_size(f1, n - 1, memo)
        if total < best:
            best = total
            if best == floor:
                break
    memo[key] = <int>best
    return <int>best


cdef int opt_depth(vector[uint64_t] f, int n, Memo& memo):
    n = canonical(f, n)
    if is_zero(f):
        return 0
    if n == 1:
        return 1
    cdef string key = make_key(f, n)
    if memo.count(key):
        return memo[key]
    cdef int floor = 0, best = n, i, a, b, m
    while (1 << floor) - 1 < n:
        floor += 1
    cdef vector[uint64_t] f0, f1
    f0.resize(nwords(n - 1))
    f1.resize(nwords(n - 1))
    for i in range(1, n + 1):
        restrict_words(f.data(), n, i, 0, f0.data())
        a = opt_depth(f0, n - 1, memo)
        if a + 1 >= best:
            continue
        restrict_words(f.data(), n, i, 1, f1.data())
        b = opt_depth(f1, n - 1, memo)
        m = 1 + (a if a > b else b)
        if m < best:
            best = m
            if best == floor:
                break
    memo[key] = best
    return best


def optimal_size(bits, int n):
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle supports n <= {ORACLE_MAX_N}, got {n}")
    cdef Memo memo
    return opt_size(unpack(bits, n), n, memo)


def optimal_depth(bits, int n):
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle supports n <= {ORACLE_MAX_N}, got {n}")
    cdef Memo memo
    return opt_depth(unpack(bits, n), n, memo)
