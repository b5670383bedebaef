#!/usr/bin/env python3
"""
Solver
Drives a step kernel from a starting point, keeps the full trace and
classifies how the run ended (converged, cycle, diverged, ...).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import config
from expr_parser import EvaluationDomainError
from kernels import (
    Jet2,
    Method,
    NonFiniteJetError,
    RootFindingError,
    StepDiagnostics,
    UndefinedStepError,
    step,
)
from problems import ProblemSpec

logger = logging.getLogger(__name__)


class DomainExitError(RootFindingError):
    """An iterate (or the starting point) is outside the problem's domain."""

    def __init__(self, x: float, message: str = ""):
        super().__init__(message or f"Iterate {x!r} is outside the problem domain")
        self.x = x


class TerminationStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    CYCLE = "cycle"
    DIVERGED = "diverged"
    UNDEFINED_STEP = "undefined_step"
    STATIONARY = "stationary"
    # Only produced by sweeps, where the error is caught per row
    DOMAIN_EXIT = "domain_exit"
    OVERFLOW = "overflow"


@dataclass
class SolverConfig:
    """Method choice, stopping tolerances and safeguards for one solve.

    f_tol=None means 1e-13 * max(1, |f(x0)|), resolved when the solve starts.
    """
    method: Method = Method(config.DEFAULT_METHOD)
    f_tol: Optional[float] = None
    x_tol: float = config.X_TOL
    max_iter: int = config.MAX_ITER
    cycle_detection_window: int = config.CYCLE_WINDOW
    cycle_tol: float = config.CYCLE_TOL
    divergence_bound: float = config.DIVERGENCE_BOUND

    def __post_init__(self):
        self.method = Method(self.method)
        if self.f_tol is not None and not self.f_tol > 0:
            raise ValueError(f"Invalid f_tol: {self.f_tol} (must be > 0)")
        if not self.x_tol >= 0:
            raise ValueError(f"Invalid x_tol: {self.x_tol} (must be >= 0)")
        if self.max_iter < 1:
            raise ValueError(f"Invalid max_iter: {self.max_iter} (must be >= 1)")
        if not 0 <= self.cycle_detection_window <= 8:
            raise ValueError(f"Invalid cycle_detection_window: {self.cycle_detection_window} (must be 0-8)")
        if not self.cycle_tol >= 0:
            raise ValueError(f"Invalid cycle_tol: {self.cycle_tol} (must be >= 0)")
        if not self.divergence_bound > 0:
            raise ValueError(f"Invalid divergence_bound: {self.divergence_bound} (must be > 0)")


@dataclass(frozen=True)
class TraceEntry:
    """One visited iterate.

    diag is the step taken from x. It is None on the final entry unless the
    run ended on a zero, stalled or diverging step, which it then records. jet is None
    only when evaluation at x overflowed.
    """
    x: float
    jet: Optional[Jet2]
    diag: Optional[StepDiagnostics] = None


@dataclass
class SolveReport:
    status: TerminationStatus
    root: Optional[float]
    iterations: int
    trace: List[TraceEntry]
    max_excursion: float
    method: Method
    x0: float
    f_tol: float
    problem: str = ""
    period: Optional[int] = None
    converged_by: Optional[str] = None  # "residual" or "step"
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is TerminationStatus.CONVERGED

    @property
    def status_label(self) -> str:
        if self.status is TerminationStatus.CYCLE:
            return f"cycle({self.period})"
        return self.status.value

    def xs(self) -> List[float]:
        return [entry.x for entry in self.trace]


def classify_cycle(xs: Sequence[float], window: int, tol: float = config.CYCLE_TOL) -> Optional[int]:
    """Smallest period p in 2..window with the last 2p iterates repeating, else None.

    Period 1 is a fixed point and belongs to the convergence rules, so a
    tail whose last two iterates already coincide is not reported.
    """
    n = len(xs)
    if n >= 2 and abs(xs[-1] - xs[-2]) <= tol * (1.0 + abs(xs[-2])):
        return None
    for p in range(2, window + 1):
        if 2 * p > n:
            break
        tail = xs[n - 2 * p:]
        if all(abs(tail[k + p] - tail[k]) <= tol * (1.0 + abs(tail[k])) for k in range(p)):
            return p
    return None


def _evaluate(problem: ProblemSpec, x: float) -> Optional[Jet2]:
    """Jet at x, or None if it overflowed."""
    try:
        return problem.evaluate(x)
    except NonFiniteJetError:
        return None
    except OverflowError:
        return None
    except EvaluationDomainError as e:
        raise DomainExitError(x, f"Iterate {x!r} left the domain of {problem.name}: {e}")
    except (ValueError, ZeroDivisionError) as e:
        raise DomainExitError(x, f"Iterate {x!r} left the domain of {problem.name}: {e}")


def solve(problem: ProblemSpec, x0: float, cfg: Optional[SolverConfig] = None) -> SolveReport:
    """Iterate the configured method from x0 until one of the stopping rules fires.

    Checked at every iterate, in order: |f| <= f_tol, the iteration cap,
    a recurring cycle, then the step itself (undefined, stationary, stalled,
    or running past divergence_bound). DomainExitError is raised if x0 or a
    later iterate leaves problem.domain; MultiplierOverflowError from HNR1
    propagates unchanged.
    """
    cfg = cfg or SolverConfig()
    if not problem.domain.contains(x0):
        raise DomainExitError(x0, f"Starting point {x0!r} is outside the domain {problem.domain} of {problem.name}")

    trace: List[TraceEntry] = []
    xs: List[float] = []
    f_tol = cfg.f_tol
    x = x0
    n = 0
    max_excursion = abs(x0)
    root = None
    period = None
    converged_by = None
    message = ""

    while True:
        jet = _evaluate(problem, x)
        if jet is None:
            trace.append(TraceEntry(x, None))
            status = TerminationStatus.DIVERGED
            message = f"f overflowed at x = {x!r}"
            break
        if f_tol is None:
            f_tol = config.F_TOL_SCALE * max(1.0, abs(jet.value))

        if abs(jet.value) <= f_tol:
            trace.append(TraceEntry(x, jet))
            status, root, converged_by = TerminationStatus.CONVERGED, x, "residual"
            break
        if n >= cfg.max_iter:
            trace.append(TraceEntry(x, jet))
            status = TerminationStatus.MAX_ITERATIONS
            break

        xs.append(x)
        period = classify_cycle(xs, cfg.cycle_detection_window, cfg.cycle_tol)
        if period is not None:
            trace.append(TraceEntry(x, jet))
            status = TerminationStatus.CYCLE
            break

        try:
            x_next, diag = step(cfg.method, x, jet)
        except UndefinedStepError as e:
            trace.append(TraceEntry(x, jet))
            status = TerminationStatus.UNDEFINED_STEP
            message = str(e)
            break

        if diag.stationary:
            trace.append(TraceEntry(x, jet, diag))
            status = TerminationStatus.STATIONARY
            message = f"Zero limiting step at turning point x = {x!r}"
            break

        if abs(diag.applied_step) <= cfg.x_tol * (1.0 + abs(x)):
            trace.append(TraceEntry(x, jet, diag))
            if abs(jet.value) <= math.sqrt(f_tol):
                status, root, converged_by = TerminationStatus.CONVERGED, x, "step"
            else:
                status = TerminationStatus.STATIONARY
                message = f"Step stalled at x = {x!r} with |f| = {abs(jet.value)!r}"
            break

        if not math.isfinite(x_next) or abs(x_next) > cfg.divergence_bound:
            trace.append(TraceEntry(x, jet, diag))
            status = TerminationStatus.DIVERGED
            message = f"Next iterate {x_next!r} exceeds the divergence bound"
            break

        if not problem.domain.contains(x_next):
            raise DomainExitError(x_next, f"Iterate {x_next!r} left the domain {problem.domain} of {problem.name}")

        trace.append(TraceEntry(x, jet, diag))
        x = x_next
        n += 1
        max_excursion = max(max_excursion, abs(x))

    if status is not TerminationStatus.CYCLE:
        period = None
    report = SolveReport(
        status=status,
        root=root,
        iterations=n,
        trace=trace,
        max_excursion=max_excursion,
        method=cfg.method,
        x0=x0,
        f_tol=f_tol if f_tol is not None else config.F_TOL_SCALE,
        problem=problem.name,
        period=period,
        converged_by=converged_by,
        message=message,
    )
    logger.debug(
        f"solve {problem.name} x0={x0!r} method={cfg.method.value}: "
        f"{report.status_label} after {n} iterations"
    )
    return report
