"""Command-line interface: ``topdown-dt <verb> [options]``.

Exit codes: 0 when every checked property passes, 1 when any fails,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, expt
from .boolfn import FAMILIES, FamilyParams, family_table, loads_table
from .dtree import optimal_depth, optimal_tree, serialize, stats, to_json
from .ehfind import SampleView, find, learn_proper, loads_sample
from .kernels import ORACLE_MAX_N
from .topdown import SplitCriterion, assert_score_bounds, build_top_down, count_z_gateway_nodes


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _add_common(p: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d if suppress else 0, help="base RNG seed")
    p.add_argument("--out", default=d, help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=d if suppress else "csv")


def _add_target(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--family", choices=FAMILIES)
    g.add_argument("--tt-file", help="truth-table file (n=<int> header, then hex digits)")
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--delta-bias", type=_fraction, default=Fraction(1, 2), help="biased Tribes target")


def _load_target(args):
    if args.tt_file:
        try:
            return loads_table(Path(args.tt_file).read_text()), None
        except OSError as e:
            raise UsageError(f"cannot read {args.tt_file}: {e.strerror}")
        except ValueError as e:
            raise UsageError(f"{args.tt_file}: {e}")
    p = FamilyParams(args.h, args.ell, args.k, args.r, args.delta_bias)
    try:
        return family_table(args.family, p)
    except ValueError as e:
        raise UsageError(str(e))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topdown-dt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"topdown-dt {__version__}")
    _add_common(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("build", parents=[common], help="run the top-down builder on one target")
    _add_target(p)
    p.add_argument("--criterion", default="influence",
                   help="influence, correlation, gini, entropy or sqrt")
    p.add_argument("--eps", type=_fraction, default=Fraction(0))
    p.add_argument("--budget", type=int, default=None, help="maximum number of leaves")
    p.add_argument("--trace-out", help="write the JSON-lines trace here")
    p.add_argument("--tree-out", help="write the JSON tree here")
    p.add_argument("--s", type=int, default=None, help="size bound; checks per-step score bounds")

    p = sub.add_parser("oracle", parents=[common], help="optimal tree size and depth (n <= 16)")
    _add_target(p)
    p.add_argument("--tree-out", help="write an optimal tree here")

    p = sub.add_parser("learn", parents=[common], help="score-estimation learner trials")
    p.add_argument("--mode", choices=("monotone", "edges"), default="monotone")
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--delta", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--s-max", type=int, default=16)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("find", parents=[common], help="run FIND on a sample file, or the FIND bench")
    p.add_argument("--sample-file")
    p.add_argument("--size", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--tree-out")
    p.add_argument("--bench", action="store_true", help="full-sample bench on random trees")
    p.add_argument("--targets", type=int, default=300)

    p = sub.add_parser("proper-learn", parents=[common], help="uniform-sample proper learner")
    p.add_argument("--tt-file", help="learn this target once instead of the random-tree bench")
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--delta", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("separation-exact", parents=[common], help="exact-family size table")
    p.add_argument("--family", choices=("nonmonotone", "monotone"), default="nonmonotone")
    p.add_argument("--h-max", type=int, default=6)
    p.add_argument("--oracle-max-h", type=int, default=3)

    p = sub.add_parser("separation-approx", parents=[common], help="approximation-family growth table")
    p.add_argument("--family", choices=("nonmonotone", "monotone"), default="nonmonotone")
    p.add_argument("--h-max", type=int, default=3)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--delta-bias", type=_fraction, default=None)
    p.add_argument("--eps", type=_fraction, default=Fraction(0))

    p = sub.add_parser("impurity-compare", parents=[common], help="criteria compared on fixed targets")
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 4))
    p.add_argument("--monotone-targets", type=int, default=20)

    p = sub.add_parser("check", parents=[common], help="property corpus over random trees")
    p.add_argument("--trees", type=int, default=500)
    p.add_argument("--monotone", type=int, default=500)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--s-max", type=int, default=32)
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 8))
    p.add_argument("--inject-fault", action="store_true", help="off-by-one step index in the score check")
    p.add_argument("--workers", type=int, default=1)
    return parser


# --------------------------------------------------------------------------
# verbs; each returns (text, ok)


def _single(spec_name: str, row: dict, args, checks=None) -> tuple[str, bool]:
    spec = expt.ExperimentSpec(spec_name, {k: str(v) for k, v in sorted(vars(args).items())
                                           if k not in ("out", "format", "verb") and not k.endswith("_out")}, seed=args.seed)
    res = expt.ExperimentResult(spec, list(row), [row], checks or {})
    return res.render(args.format), res.ok


def cmd_build(args):
    f, layout = _load_target(args)
    try:
        crit = SplitCriterion.parse(args.criterion)
    except ValueError as e:
        raise UsageError(str(e))
    if not 0 <= args.eps < Fraction(1, 2):
        raise UsageError("--eps must lie in [0, 1/2)")
    tree, trace = build_top_down(f, args.eps, crit, size_budget=args.budget)
    if args.trace_out:
        Path(args.trace_out).write_text(trace.to_jsonl())
    if args.tree_out:
        Path(args.tree_out).write_bytes(serialize(tree))
    row = trace.summary()
    row["depth"] = stats(tree).depth
    checks = {}
    if args.s:
        rep = assert_score_bounds(trace, args.s, args.eps)
        row["score_bounds"] = rep.ok
        checks["score_bounds"] = rep.ok
    if layout is not None:
        row["gateway"] = count_z_gateway_nodes(tree, layout)
    return _single("build", row, args, checks)


def cmd_oracle(args):
    f, _ = _load_target(args)
    if f.n > ORACLE_MAX_N:
        raise UsageError(f"oracle supports n <= {ORACLE_MAX_N}, got {f.n}")
    tree = optimal_tree(f)
    if args.tree_out:
        Path(args.tree_out).write_bytes(serialize(tree))
    row = {"n": f.n, "size": stats(tree).size, "depth": optimal_depth(f)}
    return _single("oracle", row, args)


def _jsonl(res: expt.ExperimentResult) -> str:
    head = {"version": __version__, "spec_hash": res.spec.digest(), "checks": res.checks}
    lines = [json.dumps(head, sort_keys=True)]
    lines += [json.dumps({c: expt._jsonable(r.get(c)) for c in res.columns}, sort_keys=True) for r in res.rows]
    return "\n".join(lines) + "\n"


def _trials(res: expt.ExperimentResult, args) -> tuple[str, bool]:
    return (_jsonl(res) if args.format == "json" else res.to_csv()), res.ok


def cmd_learn(args):
    res = expt.run_learn_bench(args.mode, args.trials, args.n, args.s_max, args.eps, args.delta,
                               args.seed, args.workers)
    return _trials(res, args)


def cmd_find(args):
    if args.bench:
        res = expt.run_find_bench(args.targets, seed=args.seed)
        return res.render(args.format), res.ok
    if not args.sample_file or args.size is None:
        raise UsageError("find needs --sample-file and --size (or --bench)")
    try:
        sample = loads_sample(Path(args.sample_file).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {args.sample_file}: {e.strerror}")
    except ValueError as e:
        raise UsageError(f"{args.sample_file}: {e}")
    if args.size < 1:
        raise UsageError("--size must be at least 1")
    d = sample.n if args.depth is None else args.depth
    if d < 0:
        raise UsageError("--depth must be non-negative")
    view = SampleView.of(sample)
    res = find(view, args.size, d)
    row = {"n": sample.n, "m": len(sample), "size": args.size, "depth": d, "found": res.found,
           "calls": res.calls, "peak_frames": res.peak_frames,
           "sample_error": None if res.tree is None else str(view.error_of(res.tree)),
           "tree": None if res.tree is None else json.dumps(to_json(res.tree), separators=(",", ":"))}
    if args.tree_out and res.tree is not None:
        Path(args.tree_out).write_bytes(serialize(res.tree))
    return _single("find", row, args)


def cmd_proper_learn(args):
    if args.tt_file:
        try:
            f = loads_table(Path(args.tt_file).read_text())
        except (OSError, ValueError) as e:
            raise UsageError(f"{args.tt_file}: {e}")
        _, rep = learn_proper(f, args.size, args.eps, args.delta, args.seed)
        row = rep.to_json()
        return _single("proper-learn", row, args)
    res = expt.run_proper_bench(args.trials, args.n, args.size, args.eps, args.delta, args.seed, args.workers)
    return _trials(res, args)


def cmd_separation_exact(args):
    res = expt.run_separation_exact(args.family, args.h_max, args.oracle_max_h)
    return res.render(args.format), res.ok


def cmd_separation_approx(args):
    fam = f"approx-{args.family}"
    if fam == "approx-nonmonotone":
        p = FamilyParams(1, args.ell, args.k or 2, args.r or 4)
    else:
        p = FamilyParams(1, args.ell, args.k or 1, args.r or 2, args.delta_bias or Fraction(3, 4))
    res = expt.run_separation_approx(fam, p, args.eps, args.h_max)
    return res.render(args.format), res.ok


def cmd_impurity_compare(args):
    res = expt.run_impurity_compare(args.monotone_targets, args.eps, args.seed)
    return res.render(args.format), res.ok


def cmd_check(args):
    res = expt.run_bound_checks(args.trees, args.n_max, args.s_max, args.monotone, args.eps, args.seed,
                                args.inject_fault, args.workers)
    return res.render(args.format), res.ok


COMMANDS = {
    "build": cmd_build,
    "oracle": cmd_oracle,
    "learn": cmd_learn,
    "find": cmd_find,
    "proper-learn": cmd_proper_learn,
    "separation-exact": cmd_separation_exact,
    "separation-approx": cmd_separation_approx,
    "impurity-compare": cmd_impurity_compare,
    "check": cmd_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        text, ok = COMMANDS[args.verb](args)
    except UsageError as e:
        print(f"topdown-dt {args.verb}: {e}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
