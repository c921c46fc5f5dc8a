"""Command-line interface: ``prodmetrics {distance,verify,transform,generate}``.

Exit codes: 0 success, 1 a verification check failed, 2 parse error,
3 validation error, 4 internal LP certification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import io
from .core import InstanceError, SpaceMismatch, BadCost, cost_matrix_e, format_rational
from .lp import LinearProgram, LpCertificationError
from .metrics import dobrushin_distance, grid_lower_bound, steif_distance
from .smoothness import (
    c_transform,
    dobrushin_norm,
    in_F_e,
    is_c_convex,
    is_one_lipschitz,
    lipschitz_table,
)
from .verify import InstanceSpec, generate_instance, random_spec, run_suite

EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_INTERNAL = 4


def _float_optimum(lp: LinearProgram) -> float:
    """Floating-point optimum via HiGHS; a cross-check only, never authoritative."""
    import numpy as np
    from scipy.optimize import linprog

    n = lp.num_vars
    sgn = -1.0 if lp.sense == "max" else 1.0
    c = np.array([sgn * float(v) for v in lp.objective])
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for con in lp.constraints:
        row = np.zeros(n)
        for j, v in con.coeffs.items():
            row[j] = float(v)
        if con.relation.value == "==":
            a_eq.append(row)
            b_eq.append(float(con.rhs))
        elif con.relation.value == "<=":
            a_ub.append(row)
            b_ub.append(float(con.rhs))
        else:
            a_ub.append(-row)
            b_ub.append(-float(con.rhs))
    bounds = [(None if lo is None else float(lo), None if hi is None else float(hi))
              for lo, hi in zip(lp.lower, lp.upper)]
    res = linprog(c, A_ub=np.array(a_ub) if a_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(a_eq) if a_eq else None, b_eq=b_eq or None,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"float solver failed: {res.message}")
    return sgn * res.fun


def _emit(args, doc: dict, lines: list[str]) -> None:
    if args.output == "structured":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _value_line(label: str, q: Fraction) -> str:
    return f"{label:<10} {format_rational(q):<24} ~ {io.decimal_approx(q)}"


def cmd_distance(args) -> int:
    space, mu, nu = io.load_instance(args.instance)
    doc: dict = {"format": 1}
    lines = []
    results = {}
    if args.metric in ("dobrushin", "both"):
        results["dobrushin"] = dobrushin_distance(mu, nu)
    if args.metric in ("steif", "both"):
        results["steif"] = steif_distance(mu, nu)
    for name, res in results.items():
        doc[name] = io.value_entry(res.value)
        lines.append(_value_line(name, res.value))
        if args.float_check:
            approx = _float_optimum(res.lp)
            doc[name]["float_check"] = repr(approx)
            lines.append(f"{'':<10} float cross-check {approx!r}")
    if args.grid:
        lb = grid_lower_bound(mu, nu, args.grid)
        doc["grid_lower_bound"] = {"resolution": args.grid, **io.value_entry(lb)}
        lines.append(_value_line(f"grid({args.grid})", lb))
    if args.witness:
        if "dobrushin" in results:
            r = results["dobrushin"]
            doc["dobrushin"]["witness_f"] = io.function_to_dict(r.witness_f)["values"]
            doc["dobrushin"]["witness_e"] = io.weights_to_dict(space, r.witness_e)
            lines.append("dobrushin witness f: " + ", ".join(
                f"{k}={io.scalar(v)}" for k, v in r.witness_f.as_map().items()))
            lines.append("dobrushin witness e: " + ", ".join(
                f"{k}={v}" for k, v in io.weights_to_dict(space, r.witness_e).items()))
        if "steif" in results:
            r = results["steif"]
            doc["steif"]["witness_plan"] = io.coupling_to_dict(r.witness_plan)
            doc["steif"]["witness_t"] = io.scalar(r.witness_t)
            lines.append("steif witness plan: " + ", ".join(
                f"{k}={v}" for k, v in io.coupling_to_dict(r.witness_plan).items()))
    status = 0
    if len(results) == 2:
        equal = results["dobrushin"].value == results["steif"].value
        doc["equal"] = equal
        lines.append(f"{'equal':<10} {'true' if equal else 'false'}")
        if not equal:
            sys.stderr.write("FATAL: Dobrushin and Steif values differ\n")
            sys.stderr.write(results["dobrushin"].lp.dump())
            sys.stderr.write(results["steif"].lp.dump())
            status = EXIT_INTERNAL
    _emit(args, doc, lines)
    return status


def cmd_verify(args) -> int:
    points = _int_list(args.points) if args.points else None
    report = run_suite(seed=args.seed, count=args.count, max_sites=args.sites,
                       max_points=args.max_points, denom=args.denom, grid=args.grid,
                       points=points)
    text = report.to_text()
    if args.report:
        Path(args.report).write_text(text)
    if args.output == "structured":
        sys.stdout.write(text)
    else:
        for e in report.sorted_entries():
            sys.stdout.write(f"seed {e.seed:>6}  {e.name:<22} {'pass' if e.passed else 'FAIL'}\n")
        fails = len(report.failures())
        sys.stdout.write(f"{len(report.entries)} checks, {fails} failed\n")
    return 0 if report.passed else EXIT_CHECK_FAILED


def cmd_transform(args) -> int:
    space, _, _ = io.load_instance(args.instance)
    f = io.load_function(args.function, space)
    doc: dict = {"format": 1}
    lines = []
    table = lipschitz_table(f)
    norm = dobrushin_norm(f)
    doc["partial_lipschitz"] = {name: io.scalar(v) for name, v in table}
    doc["norm"] = io.scalar(norm)
    lines += [f"Delta[{name}] = {format_rational(v)}" for name, v in table]
    lines.append(f"norm = {format_rational(norm)}")
    cost = None
    if args.weights:
        e = io.parse_weights(args.weights)
        if len(e) != space.num_sites:
            raise InstanceError([io.Violation("ShapeMismatch", "weights",
                                              f"need {space.num_sites} weights")])
        member = in_F_e(f, e)
        doc["in_F_e"] = member
        lines.append(f"in F_e = {'true' if member else 'false'}")
        cost = cost_matrix_e(space, e)
    if args.cost:
        cost = io.load_cost(args.cost, space)
    if cost is not None:
        cost.require_semi_metric()
        psi_c = c_transform(f, cost)
        doc["c_transform"] = io.function_to_dict(psi_c)["values"]
        doc["one_lipschitz"] = is_one_lipschitz(f, cost)
        doc["c_convex"] = is_c_convex(f, cost)
        lines.append("c-transform: " + ", ".join(
            f"{k}={io.scalar(v)}" for k, v in psi_c.as_map().items()))
        lines.append(f"1-Lipschitz = {'true' if doc['one_lipschitz'] else 'false'}")
        lines.append(f"c-convex = {'true' if doc['c_convex'] else 'false'}")
    _emit(args, doc, lines)
    return 0


def cmd_generate(args) -> int:
    if args.points:
        pts = _int_list(args.points)
        spec = InstanceSpec(args.seed, len(pts), tuple(pts), args.denom)
    else:
        spec = random_spec(args.seed, args.sites, args.max_points, args.denom)
    inst = generate_instance(spec)
    text = io.dumps_instance(inst.space, inst.mu, inst.nu)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise io.ParseError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prodmetrics",
        description="Exact Dobrushin and Steif distances on finite product spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flag(p):
        p.add_argument("--output", choices=("text", "structured"), default="text")

    p = sub.add_parser("distance", help="compute distances for an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--metric", choices=("dobrushin", "steif", "both"), default="both")
    p.add_argument("--witness", action="store_true", help="print optimal f, e and coupling")
    p.add_argument("--grid", type=int, default=0,
                   help="also report the fixed-weight lower bound at this resolution")
    p.add_argument("--float-check", action="store_true",
                   help="re-solve each program in floating point as a cross-check")
    output_flag(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("verify", help="run the randomized exact check suite")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--sites", type=int, default=3, help="maximum number of sites")
    p.add_argument("--max-points", type=int, default=3)
    p.add_argument("--points", help="fixed site sizes N1,N2,...")
    p.add_argument("--denom", type=int, default=8)
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--report", help="also write the structured report here")
    output_flag(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("transform", help="semi-norm table and c-transform of a function")
    p.add_argument("--instance", required=True, help="instance file supplying the space")
    p.add_argument("--function", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--weights", help="weight vector e as e1,e2,... (cost c_e)")
    group.add_argument("--cost", help="cost matrix document")
    output_flag(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sites", type=int, default=3, help="maximum number of sites")
    p.add_argument("--max-points", type=int, default=3)
    p.add_argument("--points", help="fixed site sizes N1,N2,...")
    p.add_argument("--denom", type=int, default=8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except io.ParseError as err:
        sys.stderr.write(f"parse error: {err}\n")
        return EXIT_PARSE
    except (InstanceError, SpaceMismatch, BadCost) as err:
        sys.stderr.write("validation error:\n")
        for v in getattr(err, "violations", [err]):
            sys.stderr.write(f"  {v}\n")
        return EXIT_VALIDATION
    except ValueError as err:
        # InstanceSpec and friends reject bad flag values
        sys.stderr.write(f"validation error: {err}\n")
        return EXIT_VALIDATION
    except LpCertificationError as err:
        sys.stderr.write(f"internal LP certification failure: {err}\n")
        if err.lp is not None:
            sys.stderr.write(err.lp.dump())
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
