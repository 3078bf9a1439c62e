"""Compare the compiled and pure-Python kernel backends.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--n 16 20 24] [--repeat 3]

Each row reports the best-of-``repeat`` wall time per backend and the
speedup. Results are checked for equality before timing.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from topdown_dt.boolfn import random_tree_function
from topdown_dt.kernels import backends


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n, bits, oracle_bits, oracle_n):
    mid = max(1, n // 2)
    yield "influence_counts", lambda k: k.influence_counts(bits, n)
    yield "cofactor_counts", lambda k: k.cofactor_counts(bits, n)
    yield "relevant_mask", lambda k: k.relevant_mask(bits, n)
    yield f"restrict(x{mid}=1)", lambda k: k.restrict(bits, n, mid, 1)
    yield "is_monotone", lambda k: k.is_monotone(bits, n)
    yield f"optimal_size(n={oracle_n})", lambda k: k.optimal_size(oracle_bits, oracle_n)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[12, 16, 20, 24])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = backends()
    if "compiled" not in impls:
        print("compiled backend not built; only the pure-Python backend is available", file=sys.stderr)
    rng = random.Random(args.seed)
    print(f"{'kernel':28s} {'n':>3s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for n in args.n:
        bits = rng.getrandbits(1 << n)
        oracle_n = min(n, 10)
        oracle_bits = random_tree_function(oracle_n, 24, args.seed).bits
        for name, call in cases(n, bits, oracle_bits, oracle_n):
            results = {k: call(mod) for k, mod in impls.items()}
            vals = list(results.values())
            if any(v != vals[0] for v in vals[1:]):
                raise SystemExit(f"backends disagree on {name} at n={n}")
            times = {k: _best(lambda m=mod: call(m), args.repeat) for k, mod in impls.items()}
            py = times["python"]
            comp = times.get("compiled")
            speed = f"{py / comp:8.1f}" if comp else "       -"
            comp_s = f"{comp:11.2e}" if comp else "          -"
            print(f"{name:28s} {n:3d} {py:10.2e} {comp_s} {speed}")


if __name__ == "__main__":
    main()
