"""Experiment harness: separation tables, criterion comparisons, property corpora, benches.

Every ``run_*`` function takes an :class:`ExperimentSpec` worth of
parameters, returns an :class:`ExperimentResult` (rows plus named
pass/fail checks), and is deterministic given its seed. Rows are sorted
by their parameters before emission, so output is byte-identical across
runs regardless of worker scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .boolfn import (
    FamilyParams,
    TruthTable,
    correlations,
    dumps_table,
    family_layout,
    family_n,
    family_table,
    influence,
    influences,
    is_monotone,
    parity,
    constant,
    random_monotone_function,
    total_influence,
    variance,
    MAX_N,
)
from .dtree import (
    depth as tree_depth,
    is_pruning_of,
    natural_tree,
    optimal_size,
    random_tree,
    serialize,
    stats,
    to_truth_table,
    completion_error,
    cost as bare_cost,
)
from .ehfind import SampleView, find, find_error_bound, learn_proper
from .kernels import ORACLE_MAX_N
from .learn import LearnerConfig, full_sample, learn_general, learn_monotone
from .topdown import (
    ALL_CRITERIA,
    BOUND_SLACK,
    GINI,
    IMPURITY_TIE,
    INFLUENCE,
    SplitCriterion,
    argmax_set,
    assert_score_bounds,
    build_top_down,
    count_z_gateway_nodes,
    gateway_nodes_by_paths,
    purity_gains,
)


# --------------------------------------------------------------------------
# specs, results, emission


@dataclass
class ExperimentSpec:
    """Everything needed to replay a run."""

    name: str
    params: dict = field(default_factory=dict)
    criterion: str = "influence"
    eps: str = "0"
    trials: int = 0
    seed: int = 0
    outputs: tuple = ()

    def canonical(self) -> str:
        d = asdict(self)
        d.pop("outputs")
        return json.dumps(d, sort_keys=True, default=str)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    columns: list
    rows: list
    checks: dict = field(default_factory=dict)
    counterexamples: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def header(self) -> str:
        return f"# topdown-dt v{__version__} spec={self.spec.digest()}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        obj = {
            "version": __version__,
            "spec": json.loads(self.spec.canonical()),
            "spec_hash": self.spec.digest(),
            "columns": self.columns,
            "rows": [{c: _jsonable(r.get(c)) for c in self.columns} for r in self.rows],
            "checks": self.checks,
            "counterexamples": self.counterexamples,
        }
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _jsonable(v):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        return float(f"{v:.6g}")
    return str(v)


def _map(fn, items, workers: int = 1):
    """Order-preserving map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _is_linear(values) -> bool:
    diffs = [b - a for a, b in zip(values, values[1:])]
    return len(set(diffs)) <= 1


# --------------------------------------------------------------------------
# separations


def _separation_row(family: str, p: FamilyParams, eps, oracle_max_h: int, budget: int) -> dict:
    n = family_n(family, p)
    row = {"family": family, "h": p.h, "n": n, "eps": str(Fraction(eps))}
    if n > MAX_N:
        row["reason"] = f"n={n} exceeds {MAX_N}"
        return row
    f, layout = family_table(family, p)
    construction = natural_tree(family, p)
    row["construction_size"] = stats(construction).size
    if p.h <= oracle_max_h and n <= ORACLE_MAX_N:
        row["optimal"] = optimal_size(f)
        row["provenance"] = "oracle"
    else:
        row["optimal"] = row["construction_size"]
        row["provenance"] = "construction"
    tree, trace = build_top_down(f, eps, INFLUENCE, size_budget=budget)
    st = stats(tree)
    row.update(
        topdown_size=st.size,
        topdown_depth=st.depth,
        termination=trace.termination,
        ratio=st.size / row["optimal"],
        gateway=count_z_gateway_nodes(tree, layout),
    )
    return row


def run_separation_exact(family: str = "nonmonotone", h_max: int = 6, oracle_max_h: int = 3,
                         budget: int | None = None) -> ExperimentResult:
    """Top-down size against the optimum on the exact-representation families."""
    fam = family if family.startswith("exact-") else f"exact-{family}"
    if fam not in ("exact-nonmonotone", "exact-monotone"):
        raise ValueError(f"unknown exact family {family!r}")
    spec = ExperimentSpec("separation-exact", {"family": fam, "h_max": h_max, "oracle_max_h": oracle_max_h})
    budget = budget or (1 << 22)
    rows = [_separation_row(fam, FamilyParams(h), 0, oracle_max_h, budget) for h in range(h_max + 1)]
    done = [r for r in rows if "topdown_size" in r]
    sizes = [r["topdown_size"] for r in done]
    checks = {
        "oracle_ratio_at_least_1": all(r["ratio"] >= 1 for r in done if r["provenance"] == "oracle"),
        "exact_termination": all(r["termination"] == "accuracy" for r in done),
    }
    if fam == "exact-nonmonotone":
        checks["doubling_plus_4"] = all(b == 2 * a + 4 for a, b in zip(sizes, sizes[1:]))
        checks["optimal_le_6h_plus_2"] = all(r["optimal"] <= 6 * r["h"] + 2 for r in done)
    else:
        checks["more_than_doubling"] = all(b > 2 * a for a, b in zip(sizes, sizes[1:]))
    cols = ["family", "h", "n", "eps", "optimal", "provenance", "construction_size",
            "topdown_size", "topdown_depth", "ratio", "termination", "reason"]
    return ExperimentResult(spec, cols, rows, checks)


def run_separation_approx(family: str = "nonmonotone", params: FamilyParams | None = None, eps=0,
                          h_max: int = 3, budget: int | None = None) -> ExperimentResult:
    """Growth of the top-down tree against the natural construction on the approximation families.

    ``params.h`` is ignored; rows run over h = 1..h_max.
    """
    fam = family if family.startswith("approx-") else f"approx-{family}"
    if fam not in ("approx-nonmonotone", "approx-monotone"):
        raise ValueError(f"unknown approx family {family!r}")
    if params is None:
        params = FamilyParams(1, ell=2, k=2, r=4) if fam == "approx-nonmonotone" else FamilyParams(
            1, ell=2, k=1, r=2, delta=Fraction(3, 4))
    eps = Fraction(eps)
    spec = ExperimentSpec(
        "separation-approx",
        {"family": fam, "ell": params.ell, "k": params.k, "r": params.r, "delta": str(params.delta), "h_max": h_max},
        eps=str(eps),
    )
    budget = budget or (1 << 22)
    rows = []
    for h in range(1, h_max + 1):
        p = FamilyParams(h, params.ell, params.k, params.r, params.delta)
        row = _separation_row(fam, p, eps, 0, budget)
        if "topdown_size" in row:
            f, layout = family_table(fam, p)
            tree, _ = build_top_down(f, eps, INFLUENCE, size_budget=budget)
            row["gateway_paths"] = gateway_nodes_by_paths(tree, layout)
            row["gateway_match"] = row["gateway_paths"] == row["gateway"]
        rows.append(row)
    done = [r for r in rows if "topdown_size" in r]
    sizes = [r["topdown_size"] for r in done]
    checks = {
        "topdown_strictly_increasing": all(b > a for a, b in zip(sizes, sizes[1:])),
        "construction_linear_in_h": _is_linear([r["construction_size"] for r in done]),
        "gateway_matches_path_walk": all(r["gateway_match"] for r in done),
    }
    if eps == 0 and fam == "approx-nonmonotone":
        checks["topdown_exceeds_construction"] = all(r["topdown_size"] > r["construction_size"] for r in done)
    cols = ["family", "h", "n", "eps", "construction_size", "topdown_size", "topdown_depth",
            "termination", "gateway", "gateway_paths", "gateway_match", "reason"]
    return ExperimentResult(spec, cols, rows, checks)


# --------------------------------------------------------------------------
# criterion comparison


def embedded_parity(n: int = 6, coords=(3, 4)) -> TruthTable:
    return parity(len(coords), n=n, coords=coords)


def _leaf_choices(trace) -> dict:
    return {st.path.bitstring() + "|" + ",".join(str(i) for i in sorted(st.path.coords)): st.var
            for st in trace.steps}


def run_impurity_compare(n_monotone: int = 20, eps=Fraction(1, 4), seed: int = 0) -> ExperimentResult:
    """Built sizes per target and criterion on parity, constant and random monotone targets.

    On monotone targets, every split a criterion makes must use the same
    variable the Influence criterion picks at that leaf (checked against the
    exact Influence tree). Whole trees may still differ when eps > 0,
    because leaves are ranked by each criterion's own values.
    """
    eps = Fraction(eps)
    spec = ExperimentSpec("impurity-compare", {"n_monotone": n_monotone}, eps=str(eps), seed=seed)
    targets = [("parity-x3x4-n6", embedded_parity(6)), ("constant-n4", constant(1, 4))]
    rng = np.random.default_rng(seed)
    for t in range(n_monotone):
        n = int(rng.integers(2, 9))
        targets.append((f"monotone-{t:03d}-n{n}", random_monotone_function(n, rng)))
    rows = []
    checks = {"parity_influence_small": True, "parity_others_larger": True,
              "constant_single_leaf": True, "monotone_same_leaf_variables": True}
    for name, f in targets:
        ref_tree, ref_trace = build_top_down(f, eps, INFLUENCE)
        exact_choices = _leaf_choices(build_top_down(f, 0, INFLUENCE)[1])
        for crit in ALL_CRITERIA:
            tree, trace = build_top_down(f, eps, crit)
            choices = _leaf_choices(trace)
            agree = all(exact_choices.get(k) == v for k, v in choices.items())
            rows.append({
                "target": name, "n": f.n, "criterion": crit.name, "eps": str(eps),
                "size": trace.size, "depth": tree_depth(tree), "termination": trace.termination,
                "error": str(trace.final_error), "same_tree": tree == ref_tree, "same_leaf_variables": agree,
            })
            if name.startswith("parity") and crit != INFLUENCE and trace.size <= ref_trace.size:
                checks["parity_others_larger"] = False
            if name.startswith("constant") and trace.size != 1:
                checks["constant_single_leaf"] = False
            if name.startswith("monotone") and not agree:
                checks["monotone_same_leaf_variables"] = False
        if name.startswith("parity") and ref_trace.size > 4:
            checks["parity_influence_small"] = False
    cols = ["target", "n", "criterion", "eps", "size", "depth", "termination", "error",
            "same_tree", "same_leaf_variables"]
    return ExperimentResult(spec, cols, rows, checks)


def argmax_agreement(f: TruthTable, G="gini") -> bool:
    """Root-level purity-gain argmax equals the influence argmax (exact on the influence side)."""
    crit = SplitCriterion.parse(G) if isinstance(G, str) else G
    gains = purity_gains(f, crit.G)
    return argmax_set(gains, IMPURITY_TIE) == argmax_set(influences(f))


# --------------------------------------------------------------------------
# property corpora


@dataclass
class PropertyTally:
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    first: str | None = None

    def record(self, ok, witness=None):
        if ok is None:
            self.skipped += 1
        elif ok:
            self.passed += 1
        else:
            self.failed += 1
            if self.first is None and witness is not None:
                self.first = witness() if callable(witness) else witness


def random_monotone_target(n: int, s_max: int, rng, tries: int = 200) -> tuple[TruthTable, int]:
    """Random monotone DNF/CNF whose optimal tree size is at most ``s_max`` (rejection)."""
    for _ in range(tries):
        f = random_monotone_function(n, rng)
        s = optimal_size(f)
        if s <= s_max:
            return f, s
    raise RuntimeError(f"no monotone target of size <= {s_max} found")


PROPERTIES = (
    "osss", "inf_le_var_log", "inf_le_log_s", "monotone_inf_le_sqrt_log_s", "avg_depth_le_log_size",
    "score_bound", "cost_telescoping", "accuracy_termination", "early_stop_prefix",
    "completion_le_cost", "argmax_gini", "argmax_entropy", "argmax_sqrt", "correlation_eq_influence",
)


def _witness(f: TruthTable, extra: dict | None = None):
    def make():
        obj = {"table": dumps_table(f).strip()}
        obj.update(extra or {})
        return json.dumps(obj, sort_keys=True)
    return make


def _check_tree_target(item):
    """Bound properties for one random tree. Returns {property: (ok|None, witness|None)}."""
    seed, n, s_gen, eps, fault = item
    T = random_tree(n, s_gen, seed)
    f = to_truth_table(T, n)
    s = optimal_size(f)
    out = {}
    var = variance(f).to_fraction()
    inf = total_influence(f).to_fraction()
    w = _witness(f, {"tree": serialize(T).decode(), "s": s})
    log_s = math.log2(s) if s > 1 else 0.0
    if var == 0 or s == 1:
        out["osss"] = (None, None)
        out["inf_le_var_log"] = (None, None)
    else:
        mx = max(x.to_fraction() for x in influences(f))
        out["osss"] = (float(mx) + BOUND_SLACK >= float(var) / log_s, w)
        out["inf_le_var_log"] = (float(inf) <= float(var) * math.log2(4 * s / float(var)) + BOUND_SLACK, w)
    out["inf_le_log_s"] = (float(inf) <= log_s + BOUND_SLACK, w)
    st = stats(T)
    out["avg_depth_le_log_size"] = (float(st.average_depth) <= math.log2(st.size) + BOUND_SLACK, w)

    tree, trace = build_top_down(f, eps, INFLUENCE)
    rep = assert_score_bounds(trace, s, eps, fault=fault)
    out["score_bound"] = (rep.ok, _witness(f, {"s": s, "eps": str(eps), "first": rep.first_failure()}))
    tele = all(st_.cost_after == st_.cost_before - st_.score for st_ in trace.steps)
    out["cost_telescoping"] = (tele, w)
    out["accuracy_termination"] = (
        trace.final_error <= eps if trace.termination == "accuracy" else None, w)
    out["completion_le_cost"] = (completion_error(trace.bare, f) <= bare_cost(trace.bare, f), w)
    coarse_eps = Fraction(1, 4)
    if eps < coarse_eps:
        small_tree, small = build_top_down(f, coarse_eps, INFLUENCE)
        prefix = [x.to_json() for x in small.steps] == [x.to_json() for x in trace.steps[: len(small.steps)]]
        out["early_stop_prefix"] = (prefix and is_pruning_of(small.bare, trace.bare), w)
    return out


def _check_monotone_target(item):
    seed, n = item
    rng = np.random.default_rng([seed, 7])
    f = random_monotone_function(n, rng)
    out = {}
    w = _witness(f)
    s = optimal_size(f)
    inf = float(total_influence(f))
    out["monotone_inf_le_sqrt_log_s"] = (inf <= math.sqrt(math.log2(s)) + BOUND_SLACK if s > 1 else None, w)
    out["argmax_gini"] = (argmax_agreement(f, "gini"), w)
    out["argmax_entropy"] = (argmax_agreement(f, "entropy"), w)
    out["argmax_sqrt"] = (argmax_agreement(f, "sqrt"), w)
    out["correlation_eq_influence"] = (correlations(f) == influences(f), w)
    return out


def run_bound_checks(n_trees: int = 500, n_max: int = 12, s_max: int = 32, n_monotone: int = 500,
                     eps=Fraction(1, 8), seed: int = 0, fault: bool = False, workers: int = 1) -> ExperimentResult:
    """Per-property pass/fail counts over random trees and random monotone functions.

    ``fault=True`` runs the step-indexed score check with a deliberate
    off-by-one, which must make the score-bound property fail.
    """
    eps = Fraction(eps)
    spec = ExperimentSpec(
        "check",
        {"n_trees": n_trees, "n_max": n_max, "s_max": s_max, "n_monotone": n_monotone, "fault": fault},
        eps=str(eps), seed=seed,
    )
    rng = np.random.default_rng(seed)
    tree_items = []
    for t in range(n_trees):
        n = int(rng.integers(1, n_max + 1))
        s = int(rng.integers(1, s_max + 1))
        tree_items.append((int(rng.integers(1 << 31)), n, s, eps, fault))
    mono_items = [(int(rng.integers(1 << 31)), int(rng.integers(1, min(n_max, 10) + 1))) for _ in range(n_monotone)]
    tallies = {p: PropertyTally() for p in PROPERTIES}
    for res in _map(_check_tree_target, tree_items, workers) + _map(_check_monotone_target, mono_items, workers):
        for prop, (ok, wit) in res.items():
            tallies[prop].record(ok, wit)
    rows = [{"property": p, "passed": t.passed, "failed": t.failed, "skipped": t.skipped} for p, t in tallies.items()]
    checks = {p: t.failed == 0 for p, t in tallies.items()}
    cex = {p: t.first for p, t in tallies.items() if t.first is not None}
    return ExperimentResult(spec, ["property", "passed", "failed", "skipped"], rows, checks, cex)


# --------------------------------------------------------------------------
# learner and FIND benches


def _learn_trial(item):
    mode, trial, seed, n, s_max, eps, delta = item
    rng = np.random.default_rng([seed, trial])
    if mode == "monotone":
        f, s = random_monotone_target(n, s_max, rng)
        cfg = LearnerConfig(s=max(s, 2), eps=eps, delta=delta, seed=int(rng.integers(1 << 31)))
        tree, rep = learn_monotone(f, cfg)
    else:
        f = parity(2, n=n, coords=(1, 2))
        cfg = LearnerConfig(s=4, eps=eps, delta=delta, seed=int(rng.integers(1 << 31)))
        tree, rep = learn_general(f, cfg)
    row = {"mode": mode, "trial": trial, "n": n, "target": dumps_table(f).strip().replace("\n", " ")}
    row.update(rep.to_json())
    row["true_error_ok"] = rep.true_error is not None and rep.true_error <= eps
    row["exact_parity"] = mode == "edges" and rep.true_error == 0 and rep.size == 4
    return row


def run_learn_bench(mode: str = "monotone", trials: int = 100, n: int = 12, s_max: int = 16,
                    eps=Fraction(1, 10), delta=Fraction(1, 10), seed: int = 0, workers: int = 1) -> ExperimentResult:
    """Seeded learner trials with true error measured against the target table."""
    if mode not in ("monotone", "edges"):
        raise ValueError(f"unknown learner mode {mode!r}")
    eps, delta = Fraction(eps), Fraction(delta)
    if mode == "edges":
        n = min(n, 6)
    spec = ExperimentSpec("learn", {"mode": mode, "n": n, "s_max": s_max, "delta": str(delta)},
                          eps=str(eps), trials=trials, seed=seed)
    items = [(mode, t, seed, n, s_max, eps, delta) for t in range(trials)]
    rows = sorted(_map(_learn_trial, items, workers), key=lambda r: r["trial"])
    need = math.ceil(Fraction(9, 10) * trials)
    checks = {"true_error_90pct": sum(r["true_error_ok"] for r in rows) >= need}
    if mode == "monotone":
        checks["quarter_score_90pct"] = sum(bool(r["quarter_ok"]) for r in rows) >= need
    else:
        checks["exact_parity_90pct"] = sum(r["exact_parity"] for r in rows) >= need
    cols = ["mode", "trial", "n", "m_train", "m_valid", "steps", "size", "termination",
            "validation_error", "true_error", "true_error_ok", "quarter_ok", "exact_parity"]
    return ExperimentResult(spec, cols, rows, checks)


def _proper_trial(item):
    trial, seed, n, s, eps, delta = item
    rng = np.random.default_rng([seed, trial])
    T = random_tree(n, s, int(rng.integers(1 << 31)))
    f = to_truth_table(T, n)
    _, rep = learn_proper(f, s, eps, delta, int(rng.integers(1 << 31)))
    row = {"trial": trial, "n": n}
    row.update(rep.to_json())
    row["ok"] = rep.found and rep.true_error is not None and rep.true_error <= eps
    return row


def run_proper_bench(trials: int = 100, n: int = 10, s: int = 16, eps=Fraction(1, 10), delta=Fraction(1, 10),
                     seed: int = 0, workers: int = 1) -> ExperimentResult:
    """The uniform-sample proper learner on random size-s trees."""
    eps, delta = Fraction(eps), Fraction(delta)
    spec = ExperimentSpec("proper-learn", {"n": n, "s": s, "delta": str(delta)}, eps=str(eps),
                          trials=trials, seed=seed)
    items = [(t, seed, n, s, eps, delta) for t in range(trials)]
    rows = sorted(_map(_proper_trial, items, workers), key=lambda r: r["trial"])
    checks = {"true_error_90pct": sum(r["ok"] for r in rows) >= math.ceil(Fraction(9, 10) * trials)}
    cols = ["trial", "n", "s", "d", "m", "well_distributed", "found", "sample_error", "true_error",
            "calls", "peak_frames", "tree_depth", "ok"]
    return ExperimentResult(spec, cols, rows, checks)


def run_find_bench(n_targets: int = 300, n_max: int = 10, s_max: int = 32, seed: int = 0,
                   sweep: bool = True) -> ExperimentResult:
    """FIND on full samples of random trees: completeness at d = n and the error bound for every d."""
    spec = ExperimentSpec("find", {"n_targets": n_targets, "n_max": n_max, "s_max": s_max, "sweep": sweep},
                          seed=seed)
    rng = np.random.default_rng(seed)
    rows = []
    checks = {"never_none_at_d_eq_n": True, "zero_error_at_d_eq_n": True, "error_bound": True,
              "peak_frames_le_2_pow_d": True, "depth_le_d": True, "error_weakly_decreasing_in_d": True}
    for t in range(n_targets):
        n = int(rng.integers(1, n_max + 1))
        s_gen = int(rng.integers(1, s_max + 1))
        T = random_tree(n, s_gen, int(rng.integers(1 << 31)))
        s = stats(T).size
        view = SampleView.of(full_sample(to_truth_table(T, n)))
        depths = range(n + 1) if sweep else [n]
        errs = []
        for d in depths:
            res = find(view, s, d)
            err = None if res.tree is None else view.error_of(res.tree)
            bound = find_error_bound(s, d)
            rows.append({"target": t, "n": n, "s": s, "d": d, "found": res.found, "error": err,
                         "bound": bound, "calls": res.calls, "peak_frames": res.peak_frames})
            if res.peak_frames > 2**d:
                checks["peak_frames_le_2_pow_d"] = False
            if res.tree is not None:
                errs.append(err)
                if err > bound:
                    checks["error_bound"] = False
                if tree_depth(res.tree) > d:
                    checks["depth_le_d"] = False
            if d == n:
                if res.tree is None:
                    checks["never_none_at_d_eq_n"] = False
                elif err != 0:
                    checks["zero_error_at_d_eq_n"] = False
        if any(b > a for a, b in zip(errs, errs[1:])):
            checks["error_weakly_decreasing_in_d"] = False
    cols = ["target", "n", "s", "d", "found", "error", "bound", "calls", "peak_frames"]
    return ExperimentResult(spec, cols, rows, checks)
