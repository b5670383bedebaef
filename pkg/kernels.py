#!/usr/bin/env python3
"""
Step Kernels
Newton, Halley and the two higher-order Newton variants (exponential and
Pade-branched multipliers), plus the second-order jet they all consume.

Every function here is pure: no logging, no shared state.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import config

# Marker for 0*inf style curvature ratios
INDETERMINATE = math.nan


class RootFindingError(Exception):
    """Base class for all root-finding errors."""


class NonFiniteJetError(RootFindingError, ValueError):
    """A jet component evaluated to inf or nan."""


class UndefinedStepError(RootFindingError):
    """The iteration has no defined next point."""

    def __init__(self, message: str, q: Optional[float] = None):
        super().__init__(message)
        self.q = q


class PoleError(UndefinedStepError):
    """Halley's multiplier 1/(1 - q/2) hit its pole at q = 2."""


class MultiplierOverflowError(RootFindingError, OverflowError):
    """The exponential multiplier is not representable."""

    def __init__(self, message: str, q: float):
        super().__init__(message)
        self.q = q


class Method(str, Enum):
    """Iteration methods, by the multiplier they apply to the Newton step."""
    NEWTON = "newton"
    HALLEY = "halley"
    HNR1 = "hnr1"
    HNR2 = "hnr2"

    @classmethod
    def parse(cls, text: str) -> "Method":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"Unknown method: {text}. Expected one of {', '.join(config.METHODS)}")


@dataclass(frozen=True)
class Jet2:
    """f(x), f'(x) and f''(x) at a single point.

    Arithmetic on jets follows truncated Taylor rules, so a jet seeded with
    Jet2(x, 1, 0) and pushed through an expression yields the expression's
    value and first two derivatives.
    """
    value: float
    d1: float
    d2: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and math.isfinite(self.d1) and math.isfinite(self.d2)):
            raise NonFiniteJetError(f"Non-finite jet ({self.value}, {self.d1}, {self.d2})")

    @classmethod
    def variable(cls, x: float) -> "Jet2":
        return cls(x, 1.0, 0.0)

    @classmethod
    def constant(cls, c: float) -> "Jet2":
        return cls(c, 0.0, 0.0)

    def compose(self, h0: float, h1: float, h2: float) -> "Jet2":
        """Apply a scalar function h given h(u), h'(u), h''(u) at u = self.value."""
        return Jet2(h0, h1 * self.d1, h2 * self.d1 * self.d1 + h1 * self.d2)

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)
        return Jet2(self.value + other, self.d1, self.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.d1, -self.d2)

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.value - other.value, self.d1 - other.d1, self.d2 - other.d2)
        return Jet2(self.value - other, self.d1, self.d2)

    def __rsub__(self, other):
        return Jet2(other - self.value, -self.d1, -self.d2)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return Jet2(
                self.value * other.value,
                self.d1 * other.value + self.value * other.d1,
                self.d2 * other.value + 2.0 * self.d1 * other.d1 + self.value * other.d2,
            )
        return Jet2(self.value * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            w = self.value / other.value
            w1 = (self.d1 - w * other.d1) / other.value
            w2 = (self.d2 - 2.0 * w1 * other.d1 - w * other.d2) / other.value
            return Jet2(w, w1, w2)
        return Jet2(self.value / other, self.d1 / other, self.d2 / other)

    def __rtruediv__(self, other):
        return Jet2.constant(other) / self

    def __pow__(self, k: float):
        u = self.value
        p0 = math.pow(u, k)
        p1 = k * math.pow(u, k - 1) if k != 0 else 0.0
        p2 = k * (k - 1) * math.pow(u, k - 2) if k not in (0, 1) else 0.0
        return self.compose(p0, p1, p2)

    def exp(self):
        e = math.exp(self.value)
        return self.compose(e, e, e)

    def log(self):
        u = self.value
        return self.compose(math.log(u), 1.0 / u, -1.0 / (u * u))

    def sqrt(self):
        s = math.sqrt(self.value)
        return self.compose(s, 0.5 / s, -0.25 / (s * self.value))

    def sin(self):
        s, c = math.sin(self.value), math.cos(self.value)
        return self.compose(s, c, -s)

    def cos(self):
        s, c = math.sin(self.value), math.cos(self.value)
        return self.compose(c, -s, -c)

    def tanh(self):
        t = math.tanh(self.value)
        sech2 = 1.0 - t * t  # no cosh, so no overflow at large |u|
        return self.compose(t, sech2, -2.0 * t * sech2)


@dataclass(frozen=True)
class StepDiagnostics:
    """What one iteration did: q, multiplier, the Newton step and the applied step."""
    q: float
    multiplier: float
    newton_step: float
    applied_step: float
    direction_reversed: bool = False
    stationary: bool = False


def is_indeterminate(q: float) -> bool:
    return math.isnan(q)


def curvature_q(j: Jet2) -> float:
    """q = f f'' / f'^2 as an extended real.

    At f' = 0 the sign of f f'' picks +inf or -inf; 0/0 gives INDETERMINATE.
    Otherwise the ratio is formed on binary mantissas and rescaled once, so
    jets near the overflow or underflow range still give their true q
    (saturating to +/-inf or 0 only when q itself is out of range).
    """
    if j.d1 == 0.0:
        if j.value == 0.0 or j.d2 == 0.0:
            return INDETERMINATE
        return math.inf if (j.value > 0.0) == (j.d2 > 0.0) else -math.inf
    mv, ev = math.frexp(j.value)
    m1, e1 = math.frexp(j.d1)
    m2, e2 = math.frexp(j.d2)
    mantissa = (mv * m2) / (m1 * m1)
    try:
        return math.ldexp(mantissa, ev + e2 - 2 * e1)
    except OverflowError:
        return math.copysign(math.inf, mantissa)


def exp_multiplier(t: float) -> float:
    """E(t) = (e^t - 1)/t, via expm1 so it stays accurate near t = 0."""
    if t == -math.inf:
        return 0.0
    if math.isnan(t):
        raise UndefinedStepError("Indeterminate curvature ratio", q=t)
    if t > config.EXP_OVERFLOW_T:
        raise MultiplierOverflowError(f"Exponential multiplier overflows at q = {t!r}", q=t)
    if abs(t) < config.TINY_T:
        return 1.0
    return math.expm1(t) / t


def pade_multiplier(q: float) -> float:
    """Pade-branched multiplier: 1 + (q/2)(1 + q/3) for q >= 0, 1/(1 - q/2) for q <= 0."""
    if math.isnan(q):
        raise UndefinedStepError("Indeterminate curvature ratio", q=q)
    if q == math.inf:
        return math.inf
    if q == -math.inf:
        return 0.0
    if q >= 0.0:
        return 1.0 + (q / 2.0) * (1.0 + q / 3.0)
    return 1.0 / (1.0 - q / 2.0)


def halley_multiplier(q: float) -> Tuple[float, bool]:
    """Halley's 1/(1 - q/2) and whether it reverses the Newton direction (q > 2)."""
    if math.isnan(q):
        raise UndefinedStepError("Indeterminate curvature ratio", q=q)
    if q == 2.0:
        raise PoleError("Halley multiplier has a pole at q = 2", q=q)
    m = 1.0 / (1.0 - q / 2.0)
    return m, m < 0.0


def _multiplier(method: Method, q: float) -> Tuple[float, bool]:
    if method is Method.HALLEY:
        return halley_multiplier(q)
    if method is Method.HNR1:
        return exp_multiplier(q), False
    if method is Method.HNR2:
        return pade_multiplier(q), False
    return 1.0, False


def step(method: Method, x: float, j: Jet2) -> Tuple[float, StepDiagnostics]:
    """One iteration x -> x - (f/f') * M(q) of the chosen method."""
    method = Method(method)
    q = curvature_q(j)

    if method is Method.NEWTON:
        if j.d1 == 0.0:
            raise UndefinedStepError("Newton step is undefined at a turning point (f' = 0)", q=q)
        newton_step = -j.value / j.d1
        x_next = x + newton_step
        return x_next, StepDiagnostics(q, 1.0, newton_step, newton_step)

    if is_indeterminate(q):
        raise UndefinedStepError("Step undefined: f f'' and f' both vanish", q=q)
    if q == math.inf:
        raise UndefinedStepError("Step undefined at a turning point with f f'' > 0 (q = +inf)", q=q)

    if q == -math.inf:
        # Limit of (f/f') * M(q) as q -> -inf is 2 f'/f'', regular at the turning point
        applied = 2.0 * j.d1 / j.d2
        if j.d1 != 0.0:
            newton_step = -j.value / j.d1
            multiplier = applied / newton_step
        else:
            newton_step = math.copysign(math.inf, -j.value)
            multiplier = 0.0
        diag = StepDiagnostics(q, multiplier, newton_step, applied, stationary=(applied == 0.0))
        return x + applied, diag

    multiplier, reversed_ = _multiplier(method, q)
    newton_step = -j.value / j.d1
    applied = newton_step * multiplier
    return x + applied, StepDiagnostics(q, multiplier, newton_step, applied, direction_reversed=reversed_)
