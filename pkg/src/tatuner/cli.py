"""Command-line front end with machine-readable JSON reports.

Exit codes: 0 success, 1 usage or model-parse failure, 2 analysis-level
failure (target already reachable, no structural path, inconclusive
exploration, exhausted budget).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from typing import Optional

from . import benchgen, engine, relax
from .errors import ParseError, SemanticError, TatunerError
from .model import (
    Model,
    Reduction,
    parse_model,
    serialize_model,
)
from .verifier import Inconclusive, Reachable, Unreachable, check_reachability

USAGE_ERROR = 1
ANALYSIS_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _add_common(sub, model_required=True):
    sub.add_argument("--model", required=model_required, help="model file path")
    sub.add_argument("--target", help="comma-separated target location names (overrides the file)")
    sub.add_argument("--tunable", help="comma-separated constraint ids owner#index")
    sub.add_argument("--json", dest="json_path", help="also write the JSON report to this file")
    sub.add_argument("--limit", type=int, default=None, help="visited-state budget per check")
    sub.add_argument("--budget", type=int, default=None, help="search budget")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tatuner", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("check", "msr", "mg", "enumerate", "relax", "mg-relax", "robustness"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "relax":
            p.add_argument("--global", dest="global_search", action="store_true",
                           help="verifier-backed global optimum instead of the path system")
        if name == "mg-relax":
            p.add_argument("--uniform", action="store_true",
                           help="uniform per-constraint relaxation instead of maximal total")
    g = sub.add_parser("gen")
    g.add_argument("--clocks", type=int, required=True)
    g.add_argument("--paths", type=int, required=True)
    g.add_argument("--len", dest="length", type=int, required=True)
    g.add_argument("--total-bound", type=int, default=None)
    g.add_argument("-o", "--output", help="write the model here instead of stdout")
    g.add_argument("--json", dest="json_path", help="also write the JSON report to this file")
    return ap


def _load_model(args) -> Model:
    with open(args.model, "r", encoding="utf-8") as fp:
        text = fp.read()
    model = parse_model(text)
    ta, table = model.ta, model.table
    if args.target:
        names = [n.strip() for n in args.target.split(",") if n.strip()]
        targets = frozenset(ta.location_index(n) for n in names)
        ta = type(ta)(ta.clocks, ta.locations, ta.edges, targets)
        table = type(table)(ta, universe=table.universe)
        model = Model(ta, table)
    if args.tunable:
        ids = [t.strip() for t in args.tunable.split(",") if t.strip()]
        model = Model(model.ta, model.table.with_tunable(ids))
    if not model.ta.targets:
        raise SemanticError("no target locations: give a target directive or --target")
    return model


def _model_hash(model: Model) -> str:
    return hashlib.sha256(serialize_model(model).encode("utf-8")).hexdigest()


def _constraints(table, red: Reduction) -> list:
    return [
        {"id": table.surface_id(cid), "atom": table.pretty(cid)} for cid in red.ids()
    ]


def _stats(stats) -> dict:
    return {
        "verifier_calls": stats.verifier_calls,
        "sat_calls": stats.sat_calls,
        "wall_time_s": round(stats.wall_time, 6),
    }


def _witness(model: Model, path) -> list:
    return list(path.interleaved(model.ta))


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2)
    print(text)
    if getattr(args, "json_path", None):
        with open(args.json_path, "w", encoding="utf-8") as fp:
            fp.write(text + "\n")


def _kwargs(args) -> dict:
    kw = {}
    if args.limit is not None:
        kw["limit"] = args.limit
    return kw


def _run_check(args) -> int:
    model = _load_model(args)
    res = check_reachability(model.ta, **_kwargs(args))
    report = {
        "command": "check",
        "model_hash": _model_hash(model),
        "kind": "check",
    }
    if isinstance(res, Reachable):
        report["result"] = "reachable"
        report["witness"] = _witness(model, res.path)
        code = 0
    elif isinstance(res, Unreachable):
        report["result"] = "unreachable"
        code = 0
    else:
        report["result"] = "inconclusive"
        report["visited"] = res.visited
        code = ANALYSIS_ERROR
    _emit(report, args)
    return code


def _run_msr(args) -> int:
    model = _load_model(args)
    out = engine.minimum_msr(model.ta, model.table, **_kwargs(args))
    report = {
        "command": "msr",
        "model_hash": _model_hash(model),
        "kind": "msr",
        "size": len(out.result),
        "constraints": _constraints(model.table, out.result),
        "chain": list(out.chain),
        "stats": _stats(out.stats),
    }
    if out.witness is not None:
        report["witness"] = _witness(model, out.witness)
    _emit(report, args)
    return 0


def _run_mg(args) -> int:
    model = _load_model(args)
    out = engine.minimum_mg(model.ta, model.table, **_kwargs(args))
    report = {
        "command": "mg",
        "model_hash": _model_hash(model),
        "kind": "mg",
        "size": len(out.result),
        "constraints": _constraints(model.table, out.result),
        "mir_size": len(out.mir),
        "chain": list(out.chain),
        "stats": _stats(out.stats),
    }
    _emit(report, args)
    return 0


def _run_enumerate(args) -> int:
    model = _load_model(args)
    kw = _kwargs(args)
    if args.budget is not None:
        kw["budget"] = args.budget
    msrs, mirs = engine.enumerate_all(model.ta, model.table, **kw)
    report = {
        "command": "enumerate",
        "model_hash": _model_hash(model),
        "kind": "enumerate",
        "msr_count": len(msrs),
        "mir_count": len(mirs),
        "msrs": [_constraints(model.table, m) for m in msrs],
        "mgs": [
            _constraints(model.table, Reduction(model.table.universe & ~m.bits)) for m in mirs
        ],
    }
    _emit(report, args)
    return 0


def _run_relax(args) -> int:
    model = _load_model(args)
    kw = _kwargs(args)
    out = engine.minimum_msr(model.ta, model.table, **kw)
    if args.budget is not None:
        kw["budget"] = args.budget
    if args.global_search:
        res = relax.min_total_relaxation_global(model.ta, model.table, out.result, **kw)
        kind = "relax-global"
    else:
        res = relax.min_total_relaxation_milp(model.ta, model.table, out.result, out.witness, **kw)
        kind = "relax-milp"
    report = {
        "command": "relax",
        "model_hash": _model_hash(model),
        "kind": kind,
        "msr_size": len(out.result),
        "cost": res.cost,
        "valuation": {
            model.table.surface_id(cid): res.valuation[cid] for cid in sorted(res.valuation)
        },
        "stats": _stats(out.stats),
    }
    if res.delays is not None:
        report["delays"] = [str(d) for d in res.delays]
    if out.witness is not None:
        report["witness"] = _witness(model, out.witness)
    _emit(report, args)
    return 0


def _run_mg_relax(args) -> int:
    model = _load_model(args)
    kw = _kwargs(args)
    out = engine.minimum_mg(model.ta, model.table, **kw)
    if args.uniform:
        delta = relax.robustness_degree(model.ta, model.table, out.result, **kw)
        report = {
            "command": "mg-relax",
            "model_hash": _model_hash(model),
            "kind": "robustness",
            "mg_size": len(out.result),
            "delta": delta,
            "constraints": _constraints(model.table, out.result),
            "stats": _stats(out.stats),
        }
    else:
        if args.budget is not None:
            kw["budget"] = args.budget
        res = relax.max_total_relaxation(model.ta, model.table, out.result, **kw)
        report = {
            "command": "mg-relax",
            "model_hash": _model_hash(model),
            "kind": "mg-max",
            "mg_size": len(out.result),
            "cost": res.cost,
            "valuation": {
                model.table.surface_id(cid): res.valuation[cid] for cid in sorted(res.valuation)
            },
            "stats": _stats(out.stats),
        }
    _emit(report, args)
    return 0


def _run_robustness(args) -> int:
    model = _load_model(args)
    kw = _kwargs(args)
    out = engine.minimum_mg(model.ta, model.table, **kw)
    delta = relax.robustness_degree(model.ta, model.table, out.result, **kw)
    report = {
        "command": "robustness",
        "model_hash": _model_hash(model),
        "kind": "robustness",
        "mg_size": len(out.result),
        "delta": delta,
        "constraints": _constraints(model.table, out.result),
        "stats": _stats(out.stats),
    }
    _emit(report, args)
    return 0


def _run_gen(args) -> int:
    model = benchgen.generate_scheduler(args.clocks, args.paths, args.length, args.total_bound)
    text = serialize_model(model)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fp:
            fp.write(text)
        report = {
            "command": "gen",
            "kind": "gen",
            "model_hash": _model_hash(model),
            "locations": len(model.ta.locations),
            "edges": len(model.ta.edges),
            "constraints": len(model.table),
            "output": args.output,
        }
        _emit(report, args)
    else:
        sys.stdout.write(text)
    return 0


_RUNNERS = {
    "check": _run_check,
    "msr": _run_msr,
    "mg": _run_mg,
    "enumerate": _run_enumerate,
    "relax": _run_relax,
    "mg-relax": _run_mg_relax,
    "robustness": _run_robustness,
    "gen": _run_gen,
}


def run(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE_ERROR
    try:
        return _RUNNERS[args.command](args)
    except (ParseError, SemanticError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except TatunerError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return ANALYSIS_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
