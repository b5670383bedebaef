#!/usr/bin/env python3
"""
Problem Catalog
Built-in test functions with hand-coded derivative triples, known roots and
valid domains. The parameterized families (log, Mobius, affine) are the
shapes on which HNR1, Halley and Newton land on the root in a single step.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from fuzzywuzzy import fuzz

import config
from kernels import Jet2, RootFindingError

logger = logging.getLogger(__name__)

SQRT612 = math.sqrt(612.0)
CUBIC_CYCLE_ROOT = -1.7692923542386314
# Turning points of x^3 - 2x + 2 are at +/- sqrt(2/3)
CUBIC_TURNING_POINT = math.sqrt(2.0 / 3.0)


class UnknownProblemError(RootFindingError, KeyError):
    """No catalog entry with the requested name."""

    def __init__(self, name: str):
        self.name = name
        self.suggestion = suggest_problem(name)
        message = f"Unknown problem '{name}'"
        if self.suggestion:
            message += f" (did you mean '{self.suggestion}'?)"
        super().__init__(message)

    def __str__(self):
        return self.args[0]


@dataclass(frozen=True)
class Domain:
    """Open interval (lo, hi); either end may be infinite."""
    lo: float = -math.inf
    hi: float = math.inf

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi

    def __str__(self):
        return f"({self.lo!r}, {self.hi!r})"


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    evaluator: Callable[[float], Jet2]
    domain: Domain = field(default_factory=Domain)
    known_roots: List[float] = field(default_factory=list)
    notes: str = ""
    formula: str = ""
    params: Dict[str, float] = field(default_factory=dict)

    def evaluate(self, x: float) -> Jet2:
        return self.evaluator(x)

    def nearest_root_index(self, x: float, tol: float = config.ROOT_MATCH_TOL) -> Optional[int]:
        """Index of the known root within tol*(1+|root|) of x, if any."""
        best = None
        for i, root in enumerate(self.known_roots):
            distance = abs(x - root)
            if distance <= tol * (1.0 + abs(root)):
                if best is None or distance < abs(x - self.known_roots[best]):
                    best = i
        return best


def _num(v: float) -> str:
    """Shortest text for a parameter inside a formula."""
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


def sqrt612() -> ProblemSpec:
    return ProblemSpec(
        name="sqrt612",
        evaluator=lambda x: Jet2(x * x - 612.0, 2.0 * x, 2.0),
        known_roots=[SQRT612],
        notes="x^2 - 612; square root by iteration",
        formula="x^2 - 612",
    )


def _tanh_jet(x: float) -> Jet2:
    t = math.tanh(x)
    sech2 = 1.0 - t * t
    return Jet2(t, sech2, -2.0 * t * sech2)


def tanh_problem() -> ProblemSpec:
    return ProblemSpec(
        name="tanh",
        evaluator=_tanh_jet,
        known_roots=[0.0],
        notes="tanh x; Newton escapes beyond |x0| ~ 1.088659",
        formula="tanh(x)",
    )


def _cubic_cycle_jet(x: float) -> Jet2:
    t = CUBIC_TURNING_POINT
    # Factored f' is exactly zero at the floating-point turning points
    return Jet2(x * x * x - 2.0 * x + 2.0, 3.0 * (x - t) * (x + t), 6.0 * x)


def cubic_cycle() -> ProblemSpec:
    return ProblemSpec(
        name="cubic_cycle",
        evaluator=_cubic_cycle_jet,
        known_roots=[CUBIC_CYCLE_ROOT],
        notes="x^3 - 2x + 2; Newton 2-cycle between 0 and 1, turning points at +/- sqrt(2/3)",
        formula="x^3 - 2*x + 2",
    )


def _fractal_cubic_jet(x: float) -> Jet2:
    return Jet2(((x - 2.0) * x - 11.0) * x + 12.0, (3.0 * x - 4.0) * x - 11.0, 6.0 * x - 4.0)


def fractal_cubic() -> ProblemSpec:
    return ProblemSpec(
        name="fractal_cubic",
        evaluator=_fractal_cubic_jet,
        known_roots=[-3.0, 1.0, 4.0],
        notes="x^3 - 2x^2 - 11x + 12 = (x+3)(x-1)(x-4); Newton basins interleave near x = 2.35",
        formula="x^3 - 2*x^2 - 11*x + 12",
    )


def log_family(a: float = 1.0, b: float = 1.0, c: float = 0.0) -> ProblemSpec:
    """a*log(bx + c), root (1 - c)/b, defined where bx + c > 0."""
    if a == 0.0 or b == 0.0:
        raise ValueError(f"Invalid log_family parameters: a and b must be non-zero (a={a}, b={b})")

    def evaluator(x: float) -> Jet2:
        u = b * x + c
        return Jet2(a * math.log(u), a * b / u, -a * b * b / (u * u))

    edge = -c / b
    domain = Domain(edge, math.inf) if b > 0 else Domain(-math.inf, edge)
    return ProblemSpec(
        name="log_family",
        evaluator=evaluator,
        domain=domain,
        known_roots=[(1.0 - c) / b],
        notes="a*log(bx + c); HNR1 is exact in one step",
        formula=f"{_num(a)}*log({_num(b)}*x + {_num(c)})",
        params={"a": a, "b": b, "c": c},
    )


def mobius(alpha: float = 0.5, beta: float = 1.0, gamma: float = -0.5, delta: float = 1.0) -> ProblemSpec:
    """(alpha x + beta)/(gamma x + delta) on the side of the pole that holds the root.

    The default is (1 + x/2)/(1 - x/2), whose Halley step from 0 lands on -2.
    """
    det = alpha * delta - beta * gamma
    if alpha == 0.0 or det == 0.0:
        raise ValueError(f"Invalid mobius parameters: need alpha != 0 and alpha*delta - beta*gamma != 0")

    def evaluator(x: float) -> Jet2:
        u = gamma * x + delta
        return Jet2((alpha * x + beta) / u, det / (u * u), -2.0 * gamma * det / (u * u * u))

    root = -beta / alpha
    if gamma == 0.0:
        domain = Domain()
    else:
        pole = -delta / gamma
        domain = Domain(pole, math.inf) if root > pole else Domain(-math.inf, pole)
    return ProblemSpec(
        name="mobius",
        evaluator=evaluator,
        domain=domain,
        known_roots=[root],
        notes="(alpha x + beta)/(gamma x + delta); Halley is exact in one step",
        formula=f"({_num(alpha)}*x + {_num(beta)})/({_num(gamma)}*x + {_num(delta)})",
        params={"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta},
    )


def affine(alpha: float = 2.0, beta: float = -3.0) -> ProblemSpec:
    if alpha == 0.0:
        raise ValueError("Invalid affine parameters: alpha must be non-zero")
    return ProblemSpec(
        name="affine",
        evaluator=lambda x: Jet2(alpha * x + beta, alpha, 0.0),
        known_roots=[-beta / alpha],
        notes="alpha x + beta; Newton is exact in one step",
        formula=f"{_num(alpha)}*x + {_num(beta)}",
        params={"alpha": alpha, "beta": beta},
    )


# name -> (factory, parameter names)
_FACTORIES: Dict[str, tuple] = {
    "sqrt612": (sqrt612, []),
    "tanh": (tanh_problem, []),
    "cubic_cycle": (cubic_cycle, []),
    "fractal_cubic": (fractal_cubic, []),
    "log_family": (log_family, ["a", "b", "c"]),
    "mobius": (mobius, ["alpha", "beta", "gamma", "delta"]),
    "affine": (affine, ["alpha", "beta"]),
}


def problem_names() -> List[str]:
    return list(_FACTORIES)


def parameter_names(name: str) -> List[str]:
    if name not in _FACTORIES:
        raise UnknownProblemError(name)
    return list(_FACTORIES[name][1])


def suggest_problem(name: str) -> Optional[str]:
    best_score, best = 0, None
    for candidate in _FACTORIES:
        score = fuzz.ratio(name.lower(), candidate)
        if score > best_score:
            best_score, best = score, candidate
    return best if best_score >= config.SUGGESTION_MIN_SCORE else None


def catalog() -> List[ProblemSpec]:
    """Every built-in problem, parameterized families at their default parameters."""
    return [factory() for factory, _ in _FACTORIES.values()]


def get_problem(name: str, params: Optional[Sequence[float]] = None) -> ProblemSpec:
    """Build a catalog problem by name, passing params positionally to a family."""
    if name not in _FACTORIES:
        raise UnknownProblemError(name)
    factory, names = _FACTORIES[name]
    params = list(params or [])
    if len(params) > len(names):
        expected = ", ".join(names) if names else "no parameters"
        raise ValueError(f"Problem {name} takes {expected}, got {len(params)} values")
    return factory(*params)
