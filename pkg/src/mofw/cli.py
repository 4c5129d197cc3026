"""Command-line front end: solve one instance, run a benchmark plan, or
rebuild performance profiles from stored results.

Exit codes: 0 success, 1 usage error, 2 solver failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bench import (emit_outputs, load_results_csv, parse_plan,
                    performance_profile, profile_svg, run_experiment)
from .geometry import enumerate_vertices, unit_simplex
from .problems import make_quadratic
from .solvers import SolverConfig, run_afw, run_dipfw, run_fw, run_pg, \
    write_trace_csv

USAGE_ERROR, SOLVER_FAILURE, IO_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the CLI contract reserves 2 for solver
    # failures, so usage problems exit 1 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="mofw",
                     description="Multiobjective Frank-Wolfe solvers and "
                                 "benchmarks over the probability simplex.")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", parents=[], help="run one solver on one "
                        "random quadratic instance")
    ps.add_argument("--problem", choices=["quad"], default="quad")
    ps.add_argument("--p", type=int, default=10)
    ps.add_argument("--n", type=int, default=10)
    ps.add_argument("--m", type=int, default=2)
    ps.add_argument("--seed", type=int, default=1)
    ps.add_argument("--solver", choices=["fw", "afw", "dipfw", "pg"],
                    default="dipfw")
    ps.add_argument("--eps", type=float, default=1e-4)
    ps.add_argument("--max-iter", type=int, default=20000)
    ps.add_argument("--step-mode", choices=["adaptive", "exact_line_search"],
                    default="adaptive")
    ps.add_argument("--stop-mode", choices=["pairwise_gap", "fw_gap"],
                    default="pairwise_gap")
    ps.add_argument("--trace", type=Path, default=None,
                    help="write the iteration trace CSV here")

    pb = sub.add_parser("bench", help="run a benchmark plan from a config file")
    pb.add_argument("--config", type=Path, required=True)
    pb.add_argument("--out", type=Path, default=None,
                    help="output directory (overrides the plan's out_dir)")

    pp = sub.add_parser("profile", help="build a performance profile from "
                        "a stored results.csv")
    pp.add_argument("--in", dest="in_dir", type=Path, required=True)
    pp.add_argument("--metric", choices=["time", "iters"], required=True)
    pp.add_argument("--svg", type=Path, required=True)
    return parser


def _cmd_solve(args):
    prob = make_quadratic(args.p, args.n, args.m, args.seed).as_problem()
    P = unit_simplex(args.n)
    cfg = SolverConfig(eps=args.eps, max_iter=args.max_iter,
                       step_mode=args.step_mode, stop_mode=args.stop_mode)
    x0 = np.zeros(args.n)
    x0[0] = 1.0
    try:
        if args.solver == "dipfw":
            tr = run_dipfw(prob, P, x0, cfg)
        elif args.solver == "fw":
            tr = run_fw(prob, P, x0, cfg)
        elif args.solver == "afw":
            tr = run_afw(prob, enumerate_vertices(P), x0=x0, cfg=cfg)
        else:
            tr = run_pg(prob, x0, cfg)
    except Exception as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return SOLVER_FAILURE
    gap = "" if tr.final_gap is None else f" final_gap={tr.final_gap:.6e}"
    elapsed = tr.records[-1].elapsed_ns / 1e9 if tr.records else 0.0
    print(f"{args.solver} on quad p={args.p} n={args.n} m={args.m} "
          f"seed={args.seed}: status={tr.status} iterations={tr.iterations} "
          f"time={elapsed:.4f}s{gap}")
    if args.trace is not None:
        try:
            write_trace_csv(tr, args.trace)
        except OSError as exc:
            print(f"cannot write trace {args.trace}: {exc}", file=sys.stderr)
            return IO_ERROR
        print(f"trace written to {args.trace}")
    return 0 if tr.status == "converged" else SOLVER_FAILURE


def _cmd_bench(args):
    try:
        plan = parse_plan(args.config)
    except OSError as exc:
        print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
        return IO_ERROR
    except ValueError as exc:
        print(f"bad plan: {exc}", file=sys.stderr)
        return USAGE_ERROR
    out_dir = args.out if args.out is not None else plan.out_dir
    results = run_experiment(plan)
    profiles = []
    if len(plan.solvers) >= 2:
        profiles = [performance_profile(results, "time"),
                    performance_profile(results, "iterations")]
    try:
        written = emit_outputs(results, profiles, out_dir, plan=plan)
    except OSError as exc:
        print(f"cannot write outputs under {out_dir}: {exc}", file=sys.stderr)
        return IO_ERROR
    failed = sum(1 for c in results.cells.values() if c.status != "converged")
    print(f"{len(results.instances)} instances x {len(plan.solvers)} solvers; "
          f"{failed} runs did not converge; {len(written)} files in {out_dir}")
    return 0 if failed == 0 else SOLVER_FAILURE


def _cmd_profile(args):
    path = args.in_dir / "results.csv"
    try:
        results = load_results_csv(path)
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return IO_ERROR
    except ValueError as exc:
        print(f"bad results file: {exc}", file=sys.stderr)
        return USAGE_ERROR
    metric = "iterations" if args.metric == "iters" else "time"
    prof = performance_profile(results, metric)
    try:
        args.svg.parent.mkdir(parents=True, exist_ok=True)
        args.svg.write_text(profile_svg(prof), encoding="utf-8")
    except OSError as exc:
        print(f"cannot write {args.svg}: {exc}", file=sys.stderr)
        return IO_ERROR
    print(f"profile ({metric}) over {len(results.instances)} instances "
          f"written to {args.svg}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "bench":
        return _cmd_bench(args)
    return _cmd_profile(args)


if __name__ == "__main__":
    sys.exit(main())
