"""Command-line interface.

Subcommands: generate (synthetic instance), preprocess (path report),
encode (QUBO file + varmap), solve (one solver on one instance, JSON result
on stdout, or --check to audit an assignment document), bench (suite runner
with csv/table/plotdata output).

Exit codes: 0 success, 2 input errors, 3 budget exhausted with no feasible
result.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import (
    InfeasibleCommodity,
    ParseError,
    PathExplosion,
    SchemaError,
)
from .encode import PenaltyConfig, encode_qubo, qubo_file_text, varmap_json
from .harness import (
    GeneratorConfig,
    SolverConfig,
    emit_report,
    generate_instance,
    load_suite,
    run_benchmark,
    run_solver,
)
from .instance import dump_instance, load_instance
from .model import (
    Assignment,
    build_mip,
    check_feasibility,
    model_stats,
    objective_value,
)
from .preprocess import (
    DEFAULT_MAX_HOPS,
    RestrictionPolicy,
    build_restriction_matrix,
    paths_document,
    restrict,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_RESULT = 3


def _write_output(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _read(path: str) -> str:
    return Path(path).read_text()


def _assignment_doc(a: Assignment) -> dict:
    return {
        "x": {"|".join(key): value for key, value in sorted(a.x.items())},
        "n": {"|".join(arc): value for arc, value in sorted(a.n.items())},
    }


def _parse_assignment_doc(doc: dict) -> Assignment:
    try:
        x = {tuple(key.split("|")): int(v) for key, v in doc["x"].items()}
        n = {tuple(key.split("|")): int(v) for key, v in doc["n"].items()}
    except (KeyError, AttributeError, ValueError) as exc:
        raise SchemaError(f"bad assignment document: {exc}") from exc
    return Assignment(x=x, n=n)


def _preprocessed(args, inst):
    policy = RestrictionPolicy.parse(args.policy)
    return restrict(inst, build_restriction_matrix(inst, policy), args.max_hops)


def _cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        num_nodes=args.nodes,
        arc_density=args.density,
        load_range=(args.load_min, args.load_max),
        tat_slack=args.tat_slack,
        commodity_fraction=args.commodities,
        seed=args.seed,
    )
    _write_output(dump_instance(generate_instance(cfg)) + "\n", args.output)
    return EXIT_OK


def _cmd_preprocess(args) -> int:
    inst = load_instance(_read(args.input))
    pre = _preprocessed(args, inst)
    doc = paths_document(pre)
    _write_output(json.dumps(doc, indent=2) + "\n", args.output)
    if pre.infeasible:
        print(f"warning: no surviving paths for {', '.join(pre.infeasible)}", file=sys.stderr)
    return EXIT_OK


def _cmd_encode(args) -> int:
    inst = load_instance(_read(args.input))
    pre = _preprocessed(args, inst)
    m = build_mip(inst, pre)
    cfg = None
    if args.flow_penalty or args.capacity_penalty or args.slack_unit:
        from .encode import default_penalty_config

        base = default_penalty_config(m)
        cfg = PenaltyConfig(
            flow_penalty=args.flow_penalty or base.flow_penalty,
            capacity_penalty=args.capacity_penalty or base.capacity_penalty,
            slack_unit=args.slack_unit or base.slack_unit,
        )
    q = encode_qubo(m, cfg)
    out = args.output or "model.qubo"
    Path(out).write_text(qubo_file_text(q))
    varmap_path = out + ".varmap.json"
    Path(varmap_path).write_text(varmap_json(q) + "\n")
    print(f"wrote {out} ({q.size} variables) and {varmap_path}")
    for warning in q.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = load_instance(_read(args.input))
    pre = _preprocessed(args, inst)
    m = build_mip(inst, pre)

    if args.check:
        a = _parse_assignment_doc(json.loads(_read(args.check)))
        report = check_feasibility(m, a)
        result = {
            "feasible": report.feasible,
            "flow_violations": [
                {"node": node, "commodity": k, "residual": residual}
                for node, k, residual in report.flow_violations
            ],
            "capacity_violations": [
                {"arc": "|".join(arc), "excess": excess}
                for arc, excess in report.capacity_violations
            ],
            "objective": objective_value(m, a),
        }
        print(json.dumps(result, indent=2))
        return EXIT_OK

    sc = SolverConfig(
        kind=args.solver,
        time_limit_s=args.time_limit_s,
        node_limit=args.node_limit,
        sweeps=args.sweeps,
        restarts=args.restarts,
        seed=args.seed,
        repair=args.repair == "on",
    )
    qubo = encode_qubo(m) if sc.kind in ("hybrid", "anneal") else None
    res = run_solver(sc, inst, pre, m, qubo)
    stats = model_stats(m)
    print(
        json.dumps(
            {
                "solver": res.solver_name,
                "objective": res.objective,
                "feasible": res.feasible,
                "bound": res.bound,
                "gap": res.gap,
                "wall_time_s": res.wall_time,
                "num_variables": stats.num_variables,
                "num_constraints": stats.num_constraints,
                "annotations": list(res.annotations),
                "assignment": _assignment_doc(res.assignment),
            },
            indent=2,
        )
    )
    return EXIT_OK if res.feasible else EXIT_NO_RESULT


def _cmd_bench(args) -> int:
    configs, policy, max_hops, solver_opts = load_suite(_read(args.suite))
    solvers = []
    for kind in args.solvers.split(","):
        kind = kind.strip()
        solvers.append(solver_opts.get(kind, SolverConfig(kind=kind)))
    records = run_benchmark(configs, solvers, policy=policy, max_hops=max_hops)
    _write_output(emit_report(records, format=args.format, redact_timing=args.redact_timing), args.output)
    if records and all(math.isnan(r.objective) for r in records):
        return EXIT_NO_RESULT
    return EXIT_OK


def _add_preprocess_flags(parser):
    parser.add_argument("--policy", default="all", help="all | nearest_m:M | radius:R_KM")
    parser.add_argument("--max-hops", type=int, default=DEFAULT_MAX_HOPS, dest="max_hops")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linehaul", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a synthetic instance document")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--commodities", type=float, default=0.5, help="fraction of OD pairs with load")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--load-min", type=float, default=1.0, dest="load_min")
    p.add_argument("--load-max", type=float, default=9.0, dest="load_max")
    p.add_argument("--tat-slack", type=float, default=1.3, dest="tat_slack")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("preprocess", help="enumerate and filter paths, report them as JSON")
    p.add_argument("-i", "--input", required=True)
    _add_preprocess_flags(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("encode", help="write the QUBO file and its varmap")
    p.add_argument("-i", "--input", required=True)
    _add_preprocess_flags(p)
    p.add_argument("--flow-penalty", type=float, default=None, dest="flow_penalty")
    p.add_argument("--capacity-penalty", type=float, default=None, dest="capacity_penalty")
    p.add_argument("--slack-unit", type=float, default=None, dest="slack_unit")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("solve", help="run one solver; SolveResult as JSON on stdout")
    p.add_argument("-i", "--input", required=True)
    _add_preprocess_flags(p)
    p.add_argument("--solver", choices=("hybrid", "exact", "greedy", "anneal"), default="hybrid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=0, help="0 picks max(8, size/64)")
    p.add_argument("--time-limit-s", type=float, default=None, dest="time_limit_s")
    p.add_argument("--node-limit", type=int, default=10**9, dest="node_limit")
    p.add_argument("--repair", choices=("on", "off"), default="on")
    p.add_argument("--check", default=None, help="audit an assignment document instead of solving")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--solvers", default="hybrid,exact")
    p.add_argument("--format", choices=("csv", "table", "plotdata"), default="csv")
    p.add_argument("--redact-timing", action="store_true", dest="redact_timing")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleCommodity, PathExplosion) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_RESULT


if __name__ == "__main__":
    sys.exit(main())
