#!/usr/bin/env python3
"""
Rootkit Command Line
Solve, sweep, bisect basin boundaries and re-run the reference experiments
for Newton, Halley, HNR1 and HNR2.

Usage:
  python rootkit.py solve --problem sqrt612 --x0 10 --method newton
  python rootkit.py solve --expr "tanh(x)" --x0 0.5 --format csv
  python rootkit.py sweep --problem fractal_cubic --method newton --from 2.3528363 --to 2.35287527 --points 4700
  python rootkit.py boundary --problem tanh --method newton --lo 0.5 --hi 2 --resolution 1e-6
  python rootkit.py reproduce tanh-basin

Exit codes: 0 converged / all checks passed, 1 no convergence or a failed
check, 2 usage or input error, 3 numerical failure (undefined step,
multiplier overflow, iterate left the domain).
"""

import argparse
import csv
import json
import logging
import sys
from typing import List, Optional

import analysis
import config
import experiments
import problems
from expr_parser import ExprParseError, expression_problem
from kernels import Method, MultiplierOverflowError
from models import (
    BoundaryRecord,
    ProblemRecord,
    ReproduceRecord,
    SolveRecord,
    SweepRecord,
    SweepResult,
    output_schema,
)
from solver import DomainExitError, SolverConfig, TerminationStatus, solve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    """Bad input detected after argument parsing; maps to exit code 2."""


def parse_params(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid --params '{text}': expected comma-separated numbers")


def _add_problem_arguments(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--problem', type=str, help='Catalog problem name (see: rootkit.py problems)')
    source.add_argument('--expr', type=str, help='Expression in x, e.g. "x^3 - 2*x + 2"')
    parser.add_argument('--params', type=parse_params, default=[],
                        help='Comma-separated parameters for log_family, mobius or affine')
    parser.add_argument('--method', choices=config.METHODS, default=config.DEFAULT_METHOD,
                        help=f'Iteration method (default: {config.DEFAULT_METHOD})')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='rootkit.py',
        description='Scalar root finding with Newton, Halley, HNR1 and HNR2',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Newton on x^2 - 612 from 10, trace as CSV
  python rootkit.py solve --problem sqrt612 --x0 10 --method newton --format csv

  # Any expression, default method hnr2
  python rootkit.py solve --expr "x^3 - 2*x + 2" --x0 0.0625

  # Which root Newton finds along a fine grid
  python rootkit.py sweep --problem fractal_cubic --method newton --from 2.3528363 --to 2.35287527 --points 4700

  # Bisect the Newton basin of tanh
  python rootkit.py boundary --problem tanh --method newton --lo 0.5 --hi 2 --resolution 1e-6

  # Re-run a reference experiment (or "all")
  python rootkit.py reproduce cubic-turning
        """
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging on stderr')
    commands = parser.add_subparsers(dest='command', required=True)

    solve_parser = commands.add_parser('solve', help='Run one solve and print the report')
    _add_problem_arguments(solve_parser)
    solve_parser.add_argument('--x0', type=float, required=True, help='Starting point')
    solve_parser.add_argument('--f-tol', type=float, default=None,
                              help='Residual tolerance (default: 1e-13 * max(1, |f(x0)|))')
    solve_parser.add_argument('--max-iter', type=int, default=config.MAX_ITER,
                              help=f'Iteration cap (default: {config.MAX_ITER})')
    solve_parser.add_argument('--format', choices=['json', 'csv'], default='json',
                              help='json report (default) or csv trace table')

    sweep_parser = commands.add_parser('sweep', help='Solve from every point of a grid')
    _add_problem_arguments(sweep_parser)
    sweep_parser.add_argument('--from', dest='start', type=float, required=True, help='First x0')
    sweep_parser.add_argument('--to', dest='stop', type=float, required=True, help='Last x0')
    spacing = sweep_parser.add_mutually_exclusive_group(required=True)
    spacing.add_argument('--points', type=int, help='Number of evenly spaced x0 values')
    spacing.add_argument('--step', type=float, help='Spacing between x0 values')
    sweep_parser.add_argument('--max-iter', type=int, default=config.BASIN_MAX_ITER,
                              help=f'Iteration cap per row (default: {config.BASIN_MAX_ITER})')
    sweep_parser.add_argument('--threads', type=int, default=None,
                              help='Worker threads (default: ROOTKIT_THREADS or 1)')
    sweep_parser.add_argument('--format', choices=['csv', 'json'], default='csv',
                              help='csv rows (default) or json')

    boundary_parser = commands.add_parser('boundary', help='Bisect a basin boundary')
    _add_problem_arguments(boundary_parser)
    boundary_parser.add_argument('--lo', type=float, required=True, help='Lower end of the bracket')
    boundary_parser.add_argument('--hi', type=float, required=True, help='Upper end of the bracket')
    boundary_parser.add_argument('--resolution', type=float, default=1e-6,
                                 help='Bracket width to stop at (default: 1e-6)')
    boundary_parser.add_argument('--max-iter', type=int, default=config.BASIN_MAX_ITER,
                                 help=f'Iteration cap per basin run (default: {config.BASIN_MAX_ITER})')

    reproduce_parser = commands.add_parser('reproduce', help='Run a reference experiment')
    reproduce_parser.add_argument('experiment', help=f"One of: {', '.join(experiments.EXPERIMENTS)}, all")
    reproduce_parser.add_argument('--format', choices=['text', 'json'], default='text',
                                  help='PASS/FAIL lines (default) or json')

    problems_parser = commands.add_parser('problems', help='List the problem catalog')
    problems_parser.add_argument('--format', choices=['text', 'json'], default='text')

    commands.add_parser('schema', help='Print the JSON schema of the output records')
    return parser


def resolve_problem(args) -> problems.ProblemSpec:
    """Catalog problem or parsed expression from --problem/--expr."""
    if args.expr is not None:
        try:
            return expression_problem(args.expr)
        except ExprParseError as e:
            raise UsageError(f"{e.reason} at position {e.position}\n{e.pointer(args.expr)}")
    try:
        return problems.get_problem(args.problem, args.params)
    except (problems.UnknownProblemError, ValueError) as e:
        raise UsageError(str(e))


def solver_config(method: str, max_iter: int, f_tol: Optional[float] = None) -> SolverConfig:
    try:
        return SolverConfig(method=Method.parse(method), f_tol=f_tol, max_iter=max_iter)
    except ValueError as e:
        raise UsageError(str(e))


def exit_code_for(status: TerminationStatus) -> int:
    if status is TerminationStatus.CONVERGED:
        return EXIT_OK
    if status in (TerminationStatus.UNDEFINED_STEP, TerminationStatus.OVERFLOW, TerminationStatus.DOMAIN_EXIT):
        return EXIT_NUMERICAL
    return EXIT_NOT_CONVERGED


def _write_csv(header: List[str], rows: List[List[str]]):
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def cmd_solve(args) -> int:
    problem = resolve_problem(args)
    cfg = solver_config(args.method, args.max_iter, args.f_tol)
    if not problem.domain.contains(args.x0):
        raise UsageError(f"x0={args.x0!r} is outside the domain {problem.domain} of {problem.name}")

    try:
        report = solve(problem, args.x0, cfg)
    except MultiplierOverflowError as e:
        logger.error(f"Multiplier overflow: {e}")
        print(f"❌ Multiplier overflow at q = {e.q!r} ({cfg.method.value}); try --method hnr2", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainExitError as e:
        logger.error(f"Domain exit: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    record = SolveRecord.from_report(report)
    if args.format == 'csv':
        _write_csv(config.TRACE_CSV_COLUMNS, [row.csv_values() for row in record.trace])
    else:
        print(record.model_dump_json(indent=2))

    if report.status is not TerminationStatus.CONVERGED:
        print(f"⚠️  {report.status_label} after {report.iterations} iterations {report.message}".rstrip(),
              file=sys.stderr)
    return exit_code_for(report.status)


def cmd_sweep(args) -> int:
    problem = resolve_problem(args)
    try:
        if args.points is not None:
            grid = analysis.linspace_grid(args.start, args.stop, args.points)
        else:
            grid = analysis.step_grid(args.start, args.stop, args.step)
        cfg = SolverConfig(method=Method.parse(args.method), max_iter=args.max_iter)
    except ValueError as e:
        raise UsageError(str(e))
    if args.threads is not None and args.threads < 1:
        raise UsageError(f"Invalid --threads: {args.threads}")

    rows = analysis.sweep(problem, cfg.method, grid, cfg, threads=args.threads)
    records = [SweepRecord.from_row(row) for row in rows]
    if args.format == 'json':
        result = SweepResult(problem=problem.name, method=cfg.method.value, rows=records)
        print(result.model_dump_json(indent=2))
    else:
        _write_csv(config.SWEEP_CSV_COLUMNS, [record.csv_values() for record in records])
    return EXIT_OK


def cmd_boundary(args) -> int:
    problem = resolve_problem(args)
    cfg = solver_config(args.method, args.max_iter)
    try:
        boundary = analysis.find_boundary(problem, cfg.method, args.lo, args.hi, args.resolution, cfg)
    except ValueError as e:
        # includes SamePredicateError: no outcome change inside [lo, hi]
        raise UsageError(str(e))
    print(BoundaryRecord.from_boundary(boundary).model_dump_json(indent=2))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    names = list(experiments.EXPERIMENTS) if args.experiment == 'all' else [args.experiment]
    try:
        records = [ReproduceRecord.from_checks(name, experiments.run_experiment(name)) for name in names]
    except experiments.UnknownExperimentError as e:
        raise UsageError(str(e))

    if args.format == 'json':
        if len(records) == 1:
            print(records[0].model_dump_json(indent=2))
        else:
            print(json.dumps([r.model_dump(mode="json") for r in records], indent=2))
    else:
        for record in records:
            print("=" * 70)
            print(f"EXPERIMENT: {record.experiment}")
            print("=" * 70)
            for check in record.checks:
                mark = "✅ PASS" if check.passed else "❌ FAIL"
                print(f"{mark}  {check.name}: measured {check.measured} (expected {check.expected})")
            print()
        passed = sum(1 for r in records for c in r.checks if c.passed)
        total = sum(len(r.checks) for r in records)
        print(f"📊 {passed}/{total} checks passed")
    return EXIT_OK if all(r.passed for r in records) else EXIT_NOT_CONVERGED


def cmd_problems(args) -> int:
    records = [
        ProblemRecord.from_spec(spec, problems.parameter_names(spec.name))
        for spec in problems.catalog()
    ]
    if args.format == 'json':
        print(json.dumps([r.model_dump(mode="json") for r in records], indent=2))
        return EXIT_OK
    for record in records:
        params = f" [params: {', '.join(record.parameter_names)}]" if record.parameter_names else ""
        roots = ", ".join(repr(r) for r in record.known_roots)
        print(f"{record.name:<14} {record.formula:<32} roots: {roots}{params}")
    return EXIT_OK


def cmd_schema(args) -> int:
    print(json.dumps(output_schema(), indent=2))
    return EXIT_OK


COMMANDS = {
    'solve': cmd_solve,
    'sweep': cmd_sweep,
    'boundary': cmd_boundary,
    'reproduce': cmd_reproduce,
    'problems': cmd_problems,
    'schema': cmd_schema,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if (args.verbose or config.DEBUG) else logging.WARNING,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        logger.debug(f"Usage error in {args.command}: {e}")
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
