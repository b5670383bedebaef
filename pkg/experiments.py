#!/usr/bin/env python3
"""
Reproduction Experiments
Named numerical experiments that re-run the classic examples for these
methods and check each published figure: the x^2 - 612 error tables,
the tanh basin thresholds, the turning-point cubic and the Newton-fractal
cubic, plus Halley's direction reversal.

Each experiment returns a list of CheckResult; `rootkit.py reproduce`
prints them as PASS/FAIL lines.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import analysis
import problems
from kernels import Jet2, Method, step
from solver import SolverConfig, TerminationStatus, solve

logger = logging.getLogger(__name__)

NEWTON_SQRT612_ERRORS = [-1.47e1, 1.09e1, 1.66e0, 5.20e-2, 5.45e-5, 6.01e-11]
HNR2_SQRT612_ERRORS = [-1.47e1, -3.51e0, -2.20e-2, -4.37e-9]
NEWTON_TANH_THRESHOLD = 1.088659
CUBIC_CYCLE_ROOT_SHORT = -1.769292
FRACTAL_NEWTON_RANGE = (2.3528363, 2.35287527)
FRACTAL_NEWTON_POINTS = 4700
FRACTAL_NEWTON_PATTERN = [1.0, -3.0, 4.0, -3.0, 4.0]
FRACTAL_HNR2_BOUNDARIES = (-1.360920, 2.694254)


class UnknownExperimentError(KeyError):
    def __init__(self, name: str):
        super().__init__(f"Unknown experiment '{name}'. Available: {', '.join(EXPERIMENTS)}")

    def __str__(self):
        return self.args[0]


@dataclass(frozen=True)
class CheckResult:
    experiment: str
    name: str
    passed: bool
    measured: str
    expected: str


def _same_3_sig(measured: float, published: float) -> bool:
    return f"{measured:.2e}" == f"{published:.2e}"


def _fmt(values) -> str:
    return "[" + ", ".join(f"{v:.3g}" for v in values) + "]"


def check_sqrt612() -> List[CheckResult]:
    """Error tables for Newton and HNR2 on x^2 - 612 from x0 = 10, and their order."""
    problem = problems.sqrt612()
    root = problem.known_roots[0]
    results = []

    for method, published in ((Method.NEWTON, NEWTON_SQRT612_ERRORS), (Method.HNR2, HNR2_SQRT612_ERRORS)):
        report = solve(problem, 10.0, SolverConfig(method=method))
        errors = analysis.error_sequence(report, root)
        head, tail = errors[:len(published)], errors[len(published):]
        matches = len(head) == len(published) and all(_same_3_sig(m, p) for m, p in zip(head, published))
        results.append(CheckResult(
            "sqrt612", f"{method.value} error sequence", matches, _fmt(head), _fmt(published)))
        at_precision = report.converged and len(tail) == 1 and abs(tail[0]) <= 2 * math.ulp(root)
        results.append(CheckResult(
            "sqrt612", f"{method.value} final error at machine precision", at_precision,
            f"{tail[0]:.3g} after {report.iterations} iterations" if tail else "missing",
            f"<= {2 * math.ulp(root):.2g}"))

        order = analysis.estimate_order(errors)
        band = (2.5, 3.5) if method is Method.HNR2 else (1.7, 2.3)
        results.append(CheckResult(
            "sqrt612", f"{method.value} convergence order", band[0] <= order <= band[1],
            f"{order:.3f}", f"in [{band[0]}, {band[1]}]"))
    return results


def check_tanh_basin() -> List[CheckResult]:
    """Newton's escape threshold for tanh and the wider HNR2 basin."""
    problem = problems.tanh_problem()
    results = []

    boundary = analysis.find_boundary(problem, Method.NEWTON, 0.5, 2.0, 1e-6)
    a = boundary.point
    results.append(CheckResult(
        "tanh-basin", "newton threshold", abs(a - NEWTON_TANH_THRESHOLD) <= 1e-5,
        f"{a:.7f}", f"{NEWTON_TANH_THRESHOLD} +/- 1e-5"))
    t = math.tanh(a)
    residual = t - 2.0 * a * (1.0 - t * t)
    results.append(CheckResult(
        "tanh-basin", "threshold solves tanh a = 2a sech^2 a", abs(residual) <= 1e-5,
        f"{residual:.2e}", "|residual| <= 1e-5"))

    cfg = analysis.basin_config(Method.NEWTON)
    symmetric = all(
        analysis.basin_outcome(problem, x, cfg) == analysis.basin_outcome(problem, -x, cfg)
        for x in (0.5, 1.0, 1.2, 1.5)
    )
    results.append(CheckResult(
        "tanh-basin", "newton basin symmetric in x0", symmetric, str(symmetric), "True"))

    # HNR2 on tanh reduces to x -> x - tanh(x), which never escapes
    reach = 2.5 * NEWTON_TANH_THRESHOLD
    samples = analysis.linspace_grid(0.05, reach, 60)
    rows = analysis.sweep(problem, Method.HNR2, samples)
    mirrored = analysis.sweep(problem, Method.HNR2, [-x for x in reversed(samples)])
    all_converge = all(row.root_index == 0 for row in rows + mirrored)
    results.append(CheckResult(
        "tanh-basin", "hnr2 basin more than twice the newton basin", all_converge and reach / a > 2.0,
        f"converges for all |x0| <= {reach:.4f} ({reach / a:.2f}x newton threshold)", "ratio > 2"))

    try:
        analysis.find_boundary(problem, Method.HNR2, 1.0, 4.0, 1e-6)
        flip = True
    except analysis.SamePredicateError:
        flip = False
    results.append(CheckResult(
        "tanh-basin", "hnr2 has no escape threshold on [1, 4]", not flip,
        "boundary found" if flip else "no outcome change", "no outcome change"))
    return results


def check_cubic_turning() -> List[CheckResult]:
    """HNR2 on x^3 - 2x + 2 near and at its turning points, and Newton's 2-cycle."""
    problem = problems.cubic_cycle()
    hnr2 = SolverConfig(method=Method.HNR2)
    results = []

    fast = solve(problem, 0.0625, hnr2)
    fourth = fast.trace[4].x if len(fast.trace) > 4 else math.nan
    results.append(CheckResult(
        "cubic-turning", "x0=0.0625 fourth iterate at the root",
        fast.converged and abs(fourth - CUBIC_CYCLE_ROOT_SHORT) <= 1e-5,
        f"{fourth!r} ({fast.status_label} after {fast.iterations})", f"{CUBIC_CYCLE_ROOT_SHORT} +/- 1e-5"))

    slow = solve(problem, 0.125, hnr2)
    results.append(CheckResult(
        "cubic-turning", "x0=0.125 converges after a large excursion",
        slow.converged and slow.max_excursion >= 1e9 and 55 <= slow.iterations <= 85,
        f"{slow.status_label}, {slow.iterations} iterations, max |x| = {slow.max_excursion:.3g}",
        "converged, 55-85 iterations, max |x| >= 1e9"))

    t = problems.CUBIC_TURNING_POINT
    at_minus = solve(problem, -t, hnr2)
    results.append(CheckResult(
        "cubic-turning", "x0=-sqrt(2/3) is stationary", at_minus.status is TerminationStatus.STATIONARY,
        at_minus.status_label, "stationary"))
    at_plus = solve(problem, t, hnr2)
    results.append(CheckResult(
        "cubic-turning", "x0=+sqrt(2/3) is undefined", at_plus.status is TerminationStatus.UNDEFINED_STEP,
        at_plus.status_label, "undefined_step"))

    cycle = solve(problem, 0.0, SolverConfig(method=Method.NEWTON))
    results.append(CheckResult(
        "cubic-turning", "newton from 0 flips between 0 and 1",
        cycle.status is TerminationStatus.CYCLE and cycle.period == 2,
        cycle.status_label, "cycle(2)"))
    return results


def check_fractal_scan() -> List[CheckResult]:
    """Root identity along a fine Newton sweep and the HNR2 basin boundaries."""
    problem = problems.fractal_cubic()
    results = []

    lo, hi = FRACTAL_NEWTON_RANGE
    rows = analysis.sweep(problem, Method.NEWTON, analysis.linspace_grid(lo, hi, FRACTAL_NEWTON_POINTS))
    runs = analysis.root_runs(rows, problem)
    results.append(CheckResult(
        "fractal-scan", "newton root runs", analysis.contains_run(runs, FRACTAL_NEWTON_PATTERN),
        _fmt(runs), f"contains {_fmt(FRACTAL_NEWTON_PATTERN)}"))

    left = analysis.find_boundary(problem, Method.HNR2, -2.0, 0.0, 1e-7)
    right = analysis.find_boundary(problem, Method.HNR2, 2.0, 3.5, 1e-7)
    for boundary, expected in zip((left, right), FRACTAL_HNR2_BOUNDARIES):
        results.append(CheckResult(
            "fractal-scan", f"hnr2 boundary near {expected}", abs(boundary.point - expected) <= 1e-4,
            f"{boundary.point:.6f}", f"{expected} +/- 1e-4"))

    edges = [-8.0, left.point, right.point, 10.0]
    margin = 1e-3
    for a, b in zip(edges, edges[1:]):
        grid = analysis.linspace_grid(a + (margin if a != edges[0] else 0.0), b - (margin if b != edges[-1] else 0.0), 1000)
        found = {row.root_index for row in analysis.sweep(problem, Method.HNR2, grid)}
        roots = sorted(problem.known_roots[i] for i in found if i is not None)
        single = len(found) == 1 and None not in found
        results.append(CheckResult(
            "fractal-scan", f"hnr2 single root on [{a:.4f}, {b:.4f}]", single,
            f"roots {roots}" + ("" if None not in found else " plus non-converged"), "one root"))
    return results


def check_halley_reversal() -> List[CheckResult]:
    """Halley steps the wrong way once q > 2; the exponential and Pade multipliers do not."""
    results = []
    steep = Jet2(1.0, 1.0, 3.0)
    x_halley, diag = step(Method.HALLEY, 0.0, steep)
    results.append(CheckResult(
        "halley-reversal", "halley at q=3 moves toward +x", x_halley > 0.0 and diag.direction_reversed,
        f"x1={x_halley!r}, reversed={diag.direction_reversed}", "x1 > 0, reversed"))
    for method in (Method.HNR1, Method.HNR2):
        x_next, _ = step(method, 0.0, steep)
        results.append(CheckResult(
            "halley-reversal", f"{method.value} at q=3 moves toward -x", x_next < 0.0,
            f"x1={x_next:.6g}", "x1 < 0"))

    x_exact, _ = step(Method.HALLEY, 0.0, Jet2(1.0, 1.0, 1.0))
    results.append(CheckResult(
        "halley-reversal", "halley at q=1 lands on -2", x_exact == -2.0, repr(x_exact), "-2.0"))
    return results


EXPERIMENTS: Dict[str, Callable[[], List[CheckResult]]] = {
    "sqrt612": check_sqrt612,
    "tanh-basin": check_tanh_basin,
    "cubic-turning": check_cubic_turning,
    "fractal-scan": check_fractal_scan,
    "halley-reversal": check_halley_reversal,
}


def run_experiment(name: str) -> List[CheckResult]:
    if name not in EXPERIMENTS:
        raise UnknownExperimentError(name)
    logger.info(f"Running experiment {name}")
    results = EXPERIMENTS[name]()
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning(f"Experiment {name}: {len(failed)} check(s) failed: {', '.join(failed)}")
    return results
