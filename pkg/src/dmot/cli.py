"""Command-line front end: ``dmot preprocess | query | dynamic | verify | bench``.

Exit codes: 0 success, 1 a verification check failed, 2 bad usage or input.
JSON output always carries ``"schema": 1`` and the command name.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bench
from .dynamic_mst import DynamicMST, dynamic_bound
from .errors import DmotError, PersistenceError
from .facility import fl_preprocess_unrestricted, fl_query_unrestricted
from .instances import FAMILIES
from .metric import load_metric
from .oracles import scipy_mst_weight
from .partition import PartitionConfig
from .persistence import load, save
from .solvers import facility_location_restricted, k_center, steiner_forest, steiner_tree, tsp_tour
from .spanner import build_pseudospanner
from .structure import preprocess
from .verify import SuiteResult, run_all

SCHEMA = 1
QUERY_KINDS = ("steiner", "forest", "tsp", "kcenter", "fl-restricted", "fl-unrestricted")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _config(args) -> PartitionConfig:
    if args.epsilon is not None:
        if args.tau is not None or args.eta is not None:
            raise UsageError("--epsilon excludes --tau and --eta")
        return PartitionConfig.from_epsilon(args.epsilon)
    cfg = PartitionConfig(tau=args.tau if args.tau is not None else 2.0, eta=args.eta if args.eta is not None else 2)
    cfg.validate()
    return cfg


def _read_costs(path: str, n: int) -> np.ndarray:
    vals = [float(t) for t in Path(path).read_text().split()]
    if len(vals) != n:
        raise UsageError(f"cost file has {len(vals)} values, expected {n}")
    return np.asarray(vals)


def _emit(args, payload: dict, human: str) -> None:
    if args.format == "json":
        print(json.dumps({"schema": SCHEMA, **payload}, indent=2))
    else:
        print(human)


def _ids(tokens) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise UsageError(f"bad point id: {e}") from None


def _query_lines(path: str) -> list[str]:
    return [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]


# ---------------------------------------------------------------------------
# commands


def cmd_preprocess(args) -> int:
    ms = load_metric(args.input, args.input_format)
    cfg = _config(args)
    t0 = time.perf_counter()
    st = preprocess(ms, cfg, seed=args.seed)
    if args.fl_costs:
        st.fl = fl_preprocess_unrestricted(st, _read_costs(args.fl_costs, ms.n), args.eps0)
    entries = save(st, args.output)
    took = time.perf_counter() - t0
    info = {
        "command": "preprocess",
        "n": ms.n,
        "tau": st.config.tau,
        "eta": st.config.eta,
        "r0": st.config.r0,
        "nodes": st.tree.node_count,
        "meetings": int(len(st.tree.meetings)),
        "entries": entries,
        "file": str(args.output),
        "bytes": Path(args.output).stat().st_size,
        "time_s": took,
    }
    _emit(args, info, "\n".join(f"{k}: {v}" for k, v in info.items() if k != "command"))
    return 0


def _solve(kind: str, st, line: str, args, costs):
    if kind == "fl-restricted":
        if ";" not in line:
            raise UsageError("fl-restricted lines look like 'cities ; facilities'")
        left, right = line.split(";", 1)
        cities, facs = _ids(left.split()), _ids(right.split())
        if costs is None:
            raise UsageError("fl-restricted needs --costs or a structure with facility costs")
        sp = build_pseudospanner(st.extract(sorted(set(cities) | set(facs))), st.config)
        sol = facility_location_restricted(sp, cities, facs, [float(costs[f]) for f in facs])
        return sp, _fl_dict(sol)
    ids = _ids(line.split())
    if kind == "fl-unrestricted":
        if st.fl is None:
            raise UsageError("structure has no facility-location index; preprocess with --fl-costs")
        return None, _fl_dict(fl_query_unrestricted(st, st.fl, ids))
    if kind == "forest":
        if len(ids) % 2:
            raise UsageError("forest lines list point pairs: 'a b c d ...'")
        pairs = list(zip(ids[0::2], ids[1::2]))
        sp = build_pseudospanner(st.extract(sorted(set(ids))), st.config)
        sol = steiner_forest(sp, pairs)
        return sp, {"edges": [list(e) for e in sol.edges], "cost": sol.weight}
    sp = build_pseudospanner(st.extract(ids), st.config)
    if kind == "steiner":
        sol = steiner_tree(sp)
        return sp, {"edges": [list(e) for e in sol.edges], "cost": sol.weight}
    if kind == "tsp":
        tour = tsp_tour(sp)
        return sp, {"tour": tour.order, "cost": tour.length}
    cs = k_center(sp, args.r)
    return sp, {
        "centers": cs.centers,
        "assignment": {str(k): v for k, v in sorted(cs.assignment.items())},
        "cost": cs.radius,
    }


def _fl_dict(sol) -> dict:
    return {
        "open": sol.open,
        "assignment": {str(k): v for k, v in sorted(sol.assignment.items())},
        "opening_cost": sol.opening_cost,
        "connection_cost": sol.connection_cost,
        "cost": sol.cost,
    }


def cmd_query(args) -> int:
    st = load(args.structure)
    costs = None
    if args.costs:
        costs = _read_costs(args.costs, st.n)
    elif st.fl is not None:
        costs = st.fl.costs
    results = []
    dump = open(args.dump_spanner, "w") if args.dump_spanner else None
    try:
        for i, line in enumerate(_query_lines(args.queries)):
            t0 = time.perf_counter()
            sp, res = _solve(args.kind, st, line, args, costs)
            res["time_s"] = time.perf_counter() - t0
            res["query"] = i
            results.append(res)
            if dump is not None and sp is not None:
                dump.write(f"# query {i}\n")
                dump.write(sp.dump())
    finally:
        if dump is not None:
            dump.close()
    human = "\n".join(
        f"query {r['query']}: cost {r['cost']:.6g} ({r['time_s'] * 1e3:.2f} ms)" for r in results
    )
    _emit(args, {"command": "query", "kind": args.kind, "results": results}, human)
    return 0


def cmd_dynamic(args) -> int:
    st = load(args.structure)
    dmat = None
    if args.verify:
        dmat = load_metric(args.verify, args.input_format).full_matrix()
        if dmat.shape[0] != st.n:
            raise UsageError("verification input does not match the structure")
    state = DynamicMST(st, seed=args.seed)
    bound = dynamic_bound(st.config)
    report = []
    failed = False
    for lineno, line in enumerate(_query_lines(args.script), 1):
        parts = line.split()
        op = parts[0]
        t0 = time.perf_counter()
        if op in ("ins", "del"):
            if len(parts) != 2:
                raise UsageError(f"line {lineno}: expected '{op} <id>'")
            (x,) = _ids(parts[1:])
            (state.insert if op == "ins" else state.delete)(x)
        elif op != "check":
            raise UsageError(f"line {lineno}: unknown operation {op!r}")
        took = time.perf_counter() - t0
        entry = {"op": op, "k": state.k, "weight": state.weight(), "time_s": took}
        if op != "check":
            entry["id"] = x
        if op == "check" or dmat is not None:
            try:
                state.check()
                entry["tree_ok"] = True
            except AssertionError as e:
                entry["tree_ok"] = False
                entry["error"] = str(e)
                failed = True
        if dmat is not None and state.k > 1:
            X = sorted(state.points)
            opt = scipy_mst_weight(dmat[np.ix_(X, X)])
            entry["true_weight"] = float(sum(dmat[u, v] for u, v, _ in state.edges()))
            entry["ratio"] = entry["weight"] / opt
            if entry["ratio"] > bound:
                failed = True
        report.append(entry)
    summary = {
        "ops": state.ops,
        "final_k": state.k,
        "rebuilds": [vars(e) for e in state.rebuilds],
        "bound": bound,
        "max_ratio": max((e.get("ratio", 0.0) for e in report), default=0.0),
        "passed": not failed,
    }
    human = "\n".join(
        f"{e['op']:<5} {e.get('id', ''):>6} k={e['k']:<5} weight={e['weight']:.6g}"
        + (f" ratio={e['ratio']:.3f}" if "ratio" in e else "")
        + ("" if e.get("tree_ok", True) else " TREE BROKEN")
        for e in report
    )
    human += f"\nrebuilds: {len(state.rebuilds)}  final k: {state.k}  passed: {not failed}"
    _emit(args, {"command": "dynamic", "report": report, "summary": summary}, human)
    return 1 if failed else 0


def cmd_verify(args) -> int:
    ms = load_metric(args.input, args.input_format)
    if args.structure:
        try:
            st = load(args.structure)
        except PersistenceError as e:
            # an unreadable structure is a failed check, not a usage error
            bad = SuiteResult("load", checked=1, failures=[f"{type(e).__name__}: {e}"])
            _emit(args, {"command": "verify", "passed": False, "suites": [bad.as_dict()]}, f"FAIL load  {bad.failures[0]}")
            return 1
        if st.n != ms.n:
            raise UsageError("structure and input sizes differ")
    else:
        st = preprocess(ms, _config(args), seed=args.seed)
    suites = run_all(st, ms, seed=args.seed)
    ok = all(s.passed for s in suites)
    human = "\n".join(
        f"{'PASS' if s.passed else 'FAIL'} {s.name:<12} {s.checked:>8} checks  {s.note}"
        + "".join(f"\n     {f}" for f in s.failures)
        for s in suites
    )
    _emit(args, {"command": "verify", "passed": ok, "suites": [s.as_dict() for s in suites]}, human)
    return 0 if ok else 1


def cmd_bench(args) -> int:
    cfg = _config(args)
    rows = bench.run_bench(
        families=args.families,
        sizes=args.sizes,
        ks=args.ks,
        trials=args.trials,
        seed=args.seed,
        config=cfg,
    )
    print(bench.render(rows, args.format))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_config(p) -> None:
    p.add_argument("--tau", type=float, default=None, help="level ratio (default 2)")
    p.add_argument("--eta", type=int, default=None, help="carving exponent (default 2)")
    p.add_argument("--epsilon", type=float, default=None, help="derive tau and eta for (1+epsilon) distances")
    p.add_argument("--seed", type=int, default=0)


def _add_common(p) -> None:
    p.add_argument("--format", choices=("human", "json"), default="human")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dmot", description="Preprocess a metric once, then answer subset queries.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="build and save the structure")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--input-format", choices=("points", "matrix"), default="points")
    p.add_argument("--fl-costs", help="opening cost per point; adds the facility-location index")
    p.add_argument("--eps0", type=float, default=0.5)
    _add_config(p)
    _add_common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("query", help="answer queries from a saved structure")
    p.add_argument("kind", choices=QUERY_KINDS)
    p.add_argument("structure")
    p.add_argument("queries", help="one query per line, space-separated point ids")
    p.add_argument("--r", type=int, default=1, help="number of centres for kcenter")
    p.add_argument("--costs", help="opening costs for fl-restricted (one per point)")
    p.add_argument("--dump-spanner", help="write each query's spanner as 'u v weight' lines")
    _add_common(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("dynamic", help="run an ins/del/check script against the dynamic MST")
    p.add_argument("structure")
    p.add_argument("script")
    p.add_argument("--verify", metavar="INPUT", help="original input; check every step against the exact MST")
    p.add_argument("--input-format", choices=("points", "matrix"), default="points")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_dynamic)

    p = sub.add_parser("verify", help="run the oracle suites")
    p.add_argument("input")
    p.add_argument("--input-format", choices=("points", "matrix"), default="points")
    p.add_argument("--structure", help="check this saved structure instead of building one")
    _add_config(p)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="timing table over generated instances")
    p.add_argument("--families", nargs="+", choices=FAMILIES, default=["uniform2d"])
    p.add_argument("--sizes", nargs="+", type=int, default=[1024, 2048, 4096])
    p.add_argument("--ks", nargs="+", type=int, default=[32])
    p.add_argument("--trials", type=int, default=30)
    _add_config(p)
    _add_common(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DmotError, ValueError, OSError) as e:
        print(f"dmot: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
