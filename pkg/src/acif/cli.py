"""Command line interface: ``acif solve | bench | plotdata | oracle``."""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .oracle import DEFAULT_RESOLUTION, GridOracle
from .pijavskii import run_pen
from .problem import ConstrainedProblem
from .problems import (ProblemFileError, ProblemSpec, builtin_registry, load_problem_file,
                       parse_delta)
from .report import (RunSummary, TraceFormatError, comparison_table, pen_trace_rows,
                     read_trace, render_table, write_plotdata, write_table_csv, write_trace)
from .solver import AcifConfig, BudgetExceeded, OutcomeKind, QDeltaMode, run_acif
from .synthetic import random_problem

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2, 64
DEFAULT_PENALTY = 15.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _delta_arg(text):
    try:
        return parse_delta(text)
    except ProblemFileError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _delta_eps(delta, eps) -> float:
    return round(delta / eps, 6)


# ---------------------------------------------------------------- problems

def resolve_problem(name: Optional[str], file: Optional[str], seed: Optional[int],
                    eps: Optional[float], delta, resolution: int = DEFAULT_RESOLUTION):
    """``(ConstrainedProblem, epsilon, spec or None)`` from the CLI sources."""
    if bool(name) == bool(file):
        raise UsageError("give exactly one of --problem or --file")
    if name == "random":
        prob = random_problem(seed)
        e = eps if eps is not None else 1e-4 * (prob.b - prob.a)
        if delta is not None:
            d = float(delta.split("*")[0]) * e if isinstance(delta, str) else delta
            prob = ConstrainedProblem(prob.functions, prob.lipschitz, prob.interval, d,
                                      prob.name, prob.labels)
        return prob, e, None
    if file:
        spec = load_problem_file(file)
    else:
        reg = builtin_registry()
        if name not in reg:
            raise UsageError(f"unknown problem {name!r}; known: {', '.join(sorted(reg))}, random")
        spec = reg[name]
    e = spec.resolved_epsilon(eps)
    return spec.build(e, delta, resolution), e, spec


def _penalty(args, spec: Optional[ProblemSpec]) -> float:
    if args.penalty is not None:
        return args.penalty
    if spec is not None and spec.penalty_P is not None:
        return spec.penalty_P
    return DEFAULT_PENALTY


def solve_acif(problem: ConstrainedProblem, eps: float, mode="full",
               max_iter: int = 10**6, label: Optional[str] = None):
    cfg = AcifConfig(eps, problem.delta, max_iter, QDeltaMode(mode))
    t0 = time.perf_counter()
    out = run_acif(problem, cfg)
    dt = time.perf_counter() - t0
    summary = RunSummary.from_trials(
        label or problem.name, "acif", problem.m, out.trace, outcome=out.kind.value,
        lower=out.lower, upper=out.upper, minimizer=out.minimizer, wall_time=dt,
        delta_eps=_delta_eps(problem.delta, eps), v_delta=list(out.v_delta))
    return summary, out


def solve_pen(problem: ConstrainedProblem, eps: float, P: float,
              max_iter: int = 10**6, label: Optional[str] = None):
    t0 = time.perf_counter()
    out = run_pen(problem, P, eps, max_iterations=max_iter)
    dt = time.perf_counter() - t0
    feasible = all(g(out.minimizer) <= 0 for g in problem.constraints)
    summary = RunSummary.from_trials(
        label or problem.name, "pen", problem.m, out.trace,
        outcome="Penalty" if feasible else "Penalty, x* infeasible",
        upper=out.value, minimizer=out.minimizer, wall_time=dt)
    return summary, out


# ---------------------------------------------------------------- commands

def cmd_solve(args) -> int:
    problem, eps, spec = resolve_problem(args.problem, args.file, args.seed, args.eps, args.delta)
    if args.method == "pen":
        summary, out = solve_pen(problem, eps, _penalty(args, spec), args.max_iter)
        print(summary)
        if args.trace:
            write_trace(pen_trace_rows(out.trace), args.trace)
        return EXIT_OK
    try:
        summary, out = solve_acif(problem, eps, args.qdelta_mode, args.max_iter)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.trace:
            write_trace(exc.state.events, args.trace)
        return EXIT_ERROR
    print(summary)
    if args.trace:
        write_trace(out.state.events, args.trace)
    if out.kind is OutcomeKind.INFEASIBLE:
        pts = ", ".join(f"{x:.8g}" for x in out.v_delta) or "empty"
        print(f"no feasible run of length >= delta found; V^delta = {{{pts}}}")
        return EXIT_INFEASIBLE
    return EXIT_OK


def _bench_sources(args) -> list[tuple[str, Optional[str]]]:
    sources = [(n, None) for n in args.problems or []]
    for d in args.dir or []:
        files = sorted(Path(d).glob("*.toml"))
        sources += [(None, str(f)) for f in files]
    if not sources:
        raise UsageError("no problems given; use --problems and/or --dir")
    return sources


def cmd_bench(args) -> int:
    summaries = []
    for name, file in _bench_sources(args):
        label = name or Path(file).stem
        try:
            base, eps, spec = resolve_problem(name, file, args.seed, args.eps, None)
            if spec is not None:
                label = spec.name
        except (ProblemFileError, UsageError) as exc:
            summaries.append(RunSummary(label, "acif", 0, [0], 0, 0, "error", error=str(exc)))
            continue
        runs = []
        for mult in (1.0, 10.0):
            prob = ConstrainedProblem(base.functions, base.lipschitz, base.interval,
                                      mult * eps, base.name, base.labels)
            runs.append(("acif", mult, prob))
        runs.append(("pen", None, base))
        for method, mult, prob in runs:
            try:
                if method == "acif":
                    s, _ = solve_acif(prob, eps, args.qdelta_mode, args.max_iter, label)
                else:
                    s, _ = solve_pen(prob, eps, _penalty(args, spec), args.max_iter, label)
            except Exception as exc:  # recorded in-row, the bench goes on
                s = RunSummary(label, method, base.m, [0] * (base.m + 1), 0, 0, "error",
                               delta_eps=mult, error=f"{type(exc).__name__}: {exc}")
            summaries.append(s)
    order = {"acif": 0, "pen": 1}
    summaries.sort(key=lambda s: (s.problem, order.get(s.method, 2), s.delta_eps or 0))
    header, rows = comparison_table(summaries)
    print(render_table(header, rows))
    if args.csv:
        write_table_csv(header, rows, args.csv)
    return EXIT_OK


def cmd_plotdata(args) -> int:
    try:
        rows = read_trace(Path(args.trace))
    except OSError as exc:
        print(f"error: cannot read {args.trace}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except TraceFormatError as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    prefix = args.out or str(Path(args.trace).with_suffix(""))
    for p in write_plotdata(rows, prefix, args.indexes):
        n = sum(1 for _ in p.open(encoding="utf-8"))
        print(f"{p}  {n} rows")
    return EXIT_OK


def cmd_oracle(args) -> int:
    problem, eps, _ = resolve_problem(args.problem, args.file, args.seed, args.eps, args.delta)
    rep = GridOracle(problem, args.resolution).report()
    print(f"{problem.name}: {rep.resolution} nodes, spacing {rep.spacing:.3g}, "
          f"delta {problem.delta:.6g}")
    print("K: " + ", ".join(f"{k:.6g}" for k in problem.lipschitz))
    print("feasible runs:")
    for lo, hi in rep.feasible_intervals:
        mark = "" if hi - lo >= problem.delta else "  (shorter than delta)"
        print(f"  [{lo:.8f}, {hi:.8f}]{mark}")
    if rep.global_min is None:
        print("no feasible run of length >= delta")
        return EXIT_INFEASIBLE
    print(f"global minimum {rep.global_min:.10f} at x = {rep.global_argmin:.8f}")
    if args.csv:
        write_table_csv(["left", "right", "length_ge_delta"],
                        [[repr(lo), repr(hi), str(hi - lo >= problem.delta)]
                         for lo, hi in rep.feasible_intervals], args.csv)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _problem_flags(p):
    p.add_argument("--problem", help="registry name, or 'random' with --seed")
    p.add_argument("--file", help="problem file (TOML)")
    p.add_argument("--eps", type=_positive, help="search accuracy (default 1e-4 (b - a))")
    p.add_argument("--delta", type=_delta_arg, help="delta as a number or 'N*eps' / 'Neps'")
    p.add_argument("--seed", type=int, default=0, help="seed for --problem random")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="acif", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one problem")
    _problem_flags(s)
    s.add_argument("--method", choices=("acif", "pen"), default="acif")
    s.add_argument("--penalty", type=_positive, help="penalty coefficient P for --method pen")
    s.add_argument("--qdelta-mode", choices=[m.value for m in QDeltaMode], default="full")
    s.add_argument("--trace", help="write the per-iteration trace CSV here")
    s.add_argument("--max-iter", type=int, default=10**6)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="ACIF at delta=eps and 10 eps against PEN")
    b.add_argument("--problems", nargs="*", help="registry names")
    b.add_argument("--dir", action="append", help="directory of problem files")
    b.add_argument("--eps", type=_positive)
    b.add_argument("--penalty", type=_positive)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--qdelta-mode", choices=[m.value for m in QDeltaMode], default="full")
    b.add_argument("--max-iter", type=int, default=10**6)
    b.add_argument("--csv", help="also write the table as CSV")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("plotdata", help="trial coordinates grouped by index from a trace")
    d.add_argument("trace", help="trace CSV written by 'solve --trace'")
    d.add_argument("--out", help="output prefix (default: trace path without suffix)")
    d.add_argument("--indexes", type=int, help="always write files for indexes 1..N")
    d.set_defaults(func=cmd_plotdata)

    o = sub.add_parser("oracle", help="grid ground truth for a problem")
    _problem_flags(o)
    o.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    o.add_argument("--csv", help="write the feasible runs as CSV")
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"acif: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProblemFileError as exc:
        print(f"acif: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, OSError, RuntimeError) as exc:
        print(f"acif: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
