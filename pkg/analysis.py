#!/usr/bin/env python3
"""
Basin Analysis
Sweeps of starting points, bisection of basin boundaries, empirical
convergence order and root-identity run lengths.
"""

import dataclasses
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

import config
from kernels import Method, MultiplierOverflowError, RootFindingError
from problems import ProblemSpec
from solver import DomainExitError, SolveReport, SolverConfig, TerminationStatus, solve

logger = logging.getLogger(__name__)


class InsufficientDataError(RootFindingError, ValueError):
    """Not enough usable errors to estimate a convergence order."""


class SamePredicateError(RootFindingError, ValueError):
    """Both ends of a boundary bracket have the same basin outcome."""


@dataclass(frozen=True)
class SweepRow:
    x0: float
    status: TerminationStatus
    root: Optional[float]
    root_index: Optional[int]
    iterations: int
    max_excursion: float
    period: Optional[int] = None

    @property
    def status_label(self) -> str:
        if self.status is TerminationStatus.CYCLE:
            return f"cycle({self.period})"
        return self.status.value

    @classmethod
    def from_report(cls, report: SolveReport, problem: ProblemSpec) -> "SweepRow":
        root_index = problem.nearest_root_index(report.root) if report.converged else None
        return cls(
            x0=report.x0,
            status=report.status,
            root=report.root,
            root_index=root_index,
            iterations=report.iterations,
            max_excursion=report.max_excursion,
            period=report.period,
        )


@dataclass(frozen=True)
class BasinBoundary:
    """A bracket [lo, hi] across which the basin outcome changes."""
    lo: float
    hi: float
    predicate: str
    lo_outcome: Optional[int]
    hi_outcome: Optional[int]
    problem: str = ""
    method: Method = Method.HNR2

    @property
    def point(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def basin_config(method: Method, cfg: Optional[SolverConfig] = None) -> SolverConfig:
    """cfg with method applied; defaults to the basin iteration cap."""
    if cfg is None:
        return SolverConfig(method=method, max_iter=config.BASIN_MAX_ITER)
    return dataclasses.replace(cfg, method=Method(method))


def sweep_one(problem: ProblemSpec, x0: float, cfg: SolverConfig) -> SweepRow:
    """A single sweep row; domain exits and multiplier overflow become statuses."""
    try:
        return SweepRow.from_report(solve(problem, x0, cfg), problem)
    except DomainExitError:
        status = TerminationStatus.DOMAIN_EXIT
    except MultiplierOverflowError:
        status = TerminationStatus.OVERFLOW
    return SweepRow(x0=x0, status=status, root=None, root_index=None, iterations=0, max_excursion=abs(x0))


def sweep(problem: ProblemSpec, method: Method, x0_grid: Iterable[float],
          cfg: Optional[SolverConfig] = None, threads: Optional[int] = None) -> List[SweepRow]:
    """Solve from every x0 in the grid; rows come back in grid order.

    Runs on a thread pool when threads (default config.SWEEP_THREADS) is
    above one. Rows are identical to independent solve calls either way.
    """
    grid = [float(x) for x in x0_grid]
    if not grid:
        raise ValueError("Sweep grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("Sweep grid must be strictly increasing")

    run_cfg = basin_config(method, cfg)
    workers = threads or config.SWEEP_THREADS

    if workers <= 1:
        rows = [sweep_one(problem, x0, run_cfg) for x0 in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda x0: sweep_one(problem, x0, run_cfg), grid))

    counts = Counter(row.status_label for row in rows)
    summary = ", ".join(f"{label}={count}" for label, count in sorted(counts.items()))
    logger.info(f"Swept {problem.name} with {run_cfg.method.value} over {len(grid)} points: {summary}")
    return rows


def basin_outcome(problem: ProblemSpec, x0: float, cfg: SolverConfig) -> Optional[int]:
    """Index of the known root reached from x0, or None if the run did not converge to one."""
    return sweep_one(problem, x0, cfg).root_index


def describe_outcome(problem: ProblemSpec, outcome: Optional[int]) -> str:
    if outcome is None:
        return "no convergence"
    return f"converges to {problem.known_roots[outcome]!r}"


def find_boundary(problem: ProblemSpec, method: Method, lo: float, hi: float,
                  resolution: float, cfg: Optional[SolverConfig] = None) -> BasinBoundary:
    """Bisect [lo, hi] down to resolution on the basin outcome.

    The outcome is which known root a run converges to (or none), so this
    finds both converge/escape thresholds and boundaries between two roots.
    """
    if not lo < hi:
        raise ValueError(f"Invalid bracket: lo={lo} must be below hi={hi}")
    if not resolution > 0:
        raise ValueError(f"Invalid resolution: {resolution} (must be > 0)")

    run_cfg = basin_config(method, cfg)
    lo_outcome = basin_outcome(problem, lo, run_cfg)
    hi_outcome = basin_outcome(problem, hi, run_cfg)
    if lo_outcome == hi_outcome:
        raise SamePredicateError(
            f"Same outcome at both ends of [{lo}, {hi}]: {describe_outcome(problem, lo_outcome)}"
        )

    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        outcome = basin_outcome(problem, mid, run_cfg)
        if outcome == lo_outcome:
            lo = mid
        else:
            hi, hi_outcome = mid, outcome

    predicate = f"{describe_outcome(problem, lo_outcome)} | {describe_outcome(problem, hi_outcome)}"
    logger.info(f"Boundary for {problem.name} ({run_cfg.method.value}) in [{lo!r}, {hi!r}]: {predicate}")
    return BasinBoundary(
        lo=lo,
        hi=hi,
        predicate=predicate,
        lo_outcome=lo_outcome,
        hi_outcome=hi_outcome,
        problem=problem.name,
        method=run_cfg.method,
    )


def error_sequence(report: SolveReport, root: float) -> List[float]:
    """Signed errors x_n - root for every iterate in the trace."""
    return [x - root for x in report.xs()]


def estimate_order(errors: Sequence[float]) -> float:
    """Empirical order log(e[n+1]/e[n]) / log(e[n]/e[n-1]) on the last usable triple.

    Errors are taken by magnitude and cut at the first one at or below
    config.ORDER_ERROR_FLOOR. The remaining errors are scanned from the end
    for the latest three consecutive, strictly decreasing values, so trailing
    rounding noise does not hide a clean triple before it.
    """
    usable = []
    for e in errors:
        e = abs(e)
        if not math.isfinite(e) or e <= config.ORDER_ERROR_FLOOR:
            break
        usable.append(e)
    if len(usable) < 3:
        raise InsufficientDataError(f"Need 3 errors above {config.ORDER_ERROR_FLOOR:.3g}, got {len(usable)}")
    for i in range(len(usable) - 3, -1, -1):
        e0, e1, e2 = usable[i:i + 3]
        if e0 > e1 > e2:
            return math.log(e2 / e1) / math.log(e1 / e0)
    raise InsufficientDataError(f"No three consecutive errors are strictly decreasing in {len(usable)} values")


def linspace_grid(lo: float, hi: float, points: int) -> List[float]:
    """points evenly spaced values from lo to hi inclusive."""
    if points < 1:
        raise ValueError(f"Invalid number of points: {points}")
    if lo > hi or (points > 1 and lo == hi):
        raise ValueError(f"Invalid range: from={lo} must be below to={hi}")
    if points == 1:
        return [float(lo)]
    return np.linspace(lo, hi, points).tolist()


def step_grid(lo: float, hi: float, spacing: float) -> List[float]:
    """Grid from lo with the given spacing, not passing hi."""
    if not spacing > 0:
        raise ValueError(f"Invalid step: {spacing} (must be > 0)")
    if not lo < hi:
        raise ValueError(f"Invalid range: from={lo} must be below to={hi}")
    count = int(math.floor((hi - lo) / spacing + 1e-9)) + 1
    return (lo + spacing * np.arange(count)).tolist()


def root_runs(rows: Sequence[SweepRow], problem: ProblemSpec) -> List[float]:
    """Roots reached along the sweep with consecutive repeats collapsed.

    Rows that did not converge to a known root are skipped.
    """
    runs: List[float] = []
    for row in rows:
        if row.root_index is None:
            continue
        root = problem.known_roots[row.root_index]
        if not runs or runs[-1] != root:
            runs.append(root)
    return runs


def contains_run(sequence: Sequence[float], pattern: Sequence[float]) -> bool:
    """Whether pattern appears as consecutive items of sequence."""
    n = len(pattern)
    return any(list(sequence[i:i + n]) == list(pattern) for i in range(len(sequence) - n + 1))
