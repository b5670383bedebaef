import math

import numpy as np
import pytest

from kernels import (
    INDETERMINATE,
    Jet2,
    Method,
    MultiplierOverflowError,
    NonFiniteJetError,
    PoleError,
    UndefinedStepError,
    curvature_q,
    exp_multiplier,
    halley_multiplier,
    pade_multiplier,
    step,
)
from problems import CUBIC_TURNING_POINT, affine, cubic_cycle, log_family, mobius, sqrt612


def exp_multiplier_series(t: float) -> float:
    """sum t^k / (k+1)!, converged to double precision for |t| <= 1."""
    total, term = 0.0, 1.0
    for k in range(1, 30):
        total += term
        term *= t / (k + 1)
    return total


# ---------------------------------------------------------------------------
# Jet2
# ---------------------------------------------------------------------------

def test_jet_rejects_non_finite_components():
    with pytest.raises(NonFiniteJetError):
        Jet2(math.inf, 1.0, 0.0)
    with pytest.raises(NonFiniteJetError):
        Jet2(0.0, math.nan, 0.0)
    with pytest.raises(NonFiniteJetError):
        Jet2(0.0, 1.0, -math.inf)


def test_jet_product_and_quotient_rules():
    x = Jet2.variable(2.0)
    cube = x * x * x
    assert (cube.value, cube.d1, cube.d2) == (8.0, 12.0, 12.0)

    inverse = 1.0 / x
    assert inverse.value == pytest.approx(0.5)
    assert inverse.d1 == pytest.approx(-0.25)
    assert inverse.d2 == pytest.approx(0.25)


def test_jet_elementary_functions():
    x = Jet2.variable(0.3)
    s = x.sin()
    assert (s.value, s.d1, s.d2) == pytest.approx((math.sin(0.3), math.cos(0.3), -math.sin(0.3)))
    lg = Jet2.variable(5.0).log()
    assert (lg.value, lg.d1, lg.d2) == pytest.approx((math.log(5.0), 0.2, -0.04))
    sq = Jet2.variable(4.0).sqrt()
    assert (sq.value, sq.d1, sq.d2) == pytest.approx((2.0, 0.25, -1.0 / 32.0))


def test_jet_tanh_does_not_overflow_far_out():
    j = Jet2.variable(1000.0).tanh()
    assert j.value == 1.0
    assert j.d1 == 0.0
    assert j.d2 == 0.0


def test_jet_constant_power():
    j = Jet2.variable(3.0) ** 2.0
    assert (j.value, j.d1, j.d2) == (9.0, 6.0, 2.0)
    with pytest.raises(ValueError):
        Jet2.variable(-8.0) ** (1.0 / 3.0)


def test_method_parse():
    assert Method.parse("HNR2") is Method.HNR2
    assert Method.parse(" newton ") is Method.NEWTON
    with pytest.raises(ValueError, match="Unknown method"):
        Method.parse("secant")


# ---------------------------------------------------------------------------
# curvature_q and multipliers
# ---------------------------------------------------------------------------

def test_curvature_q_examples():
    assert curvature_q(Jet2(-512.0, 20.0, 2.0)) == pytest.approx(-2.56)
    assert curvature_q(Jet2(7.0, -3.0, 0.0)) == 0.0
    assert curvature_q(Jet2(3.0887, 0.0, -4.899)) == -math.inf
    assert curvature_q(Jet2(1.0, 0.0, 1.0)) == math.inf
    assert math.isnan(curvature_q(Jet2(0.0, 0.0, 1.0)))
    assert math.isnan(INDETERMINATE)


def test_curvature_q_survives_extreme_magnitudes():
    big = math.exp(360.0)
    assert curvature_q(Jet2(big - 2.0, big, big)) == pytest.approx(1.0, rel=1e-12)
    assert curvature_q(Jet2(1e-200, 1e-170, 1e-200)) == pytest.approx(1e-60, rel=1e-12)
    assert curvature_q(Jet2(-1e300, 1e-10, 1e-300)) == pytest.approx(-1e20, rel=1e-12)
    assert curvature_q(Jet2(1e300, 1e-300, 1e300)) == math.inf
    assert curvature_q(Jet2(1e-300, 1e300, 1e-300)) == 0.0
    # f f'' underflows but both factors are non-zero
    assert curvature_q(Jet2(1e-200, 0.0, -1e-200)) == -math.inf


def test_step_defined_for_huge_jets():
    big = math.exp(360.0)
    jet = Jet2(big - 2.0, big, big)
    for method in (Method.HALLEY, Method.HNR1, Method.HNR2):
        x_next, diag = step(method, 360.0, jet)
        assert diag.q == pytest.approx(1.0, rel=1e-12)
        assert x_next < 360.0


def test_exp_multiplier_examples():
    assert exp_multiplier(0.0) == 1.0
    assert exp_multiplier(1.0) == pytest.approx(1.718281828459045, rel=1e-15)
    assert exp_multiplier(-2.56) == pytest.approx(0.36043, abs=1e-5)
    assert exp_multiplier(-math.inf) == 0.0
    assert exp_multiplier(1e-310) == 1.0


def test_exp_multiplier_accurate_near_zero():
    for t in np.concatenate([np.linspace(-1.0, 1.0, 401), np.geomspace(1e-12, 1e-3, 50)]):
        t = float(t)
        assert exp_multiplier(t) == pytest.approx(exp_multiplier_series(t), rel=1e-14)


def test_exp_multiplier_overflow_is_an_error():
    with pytest.raises(MultiplierOverflowError) as err:
        exp_multiplier(710.0)
    assert err.value.q == 710.0
    with pytest.raises(MultiplierOverflowError):
        exp_multiplier(math.inf)
    with pytest.raises(UndefinedStepError):
        exp_multiplier(math.nan)


def test_pade_multiplier_examples():
    assert pade_multiplier(0.0) == 1.0
    assert pade_multiplier(3.0) == 4.0
    assert pade_multiplier(-2.56) == pytest.approx(0.438596491, abs=1e-9)
    assert pade_multiplier(math.inf) == math.inf
    assert pade_multiplier(-math.inf) == 0.0
    with pytest.raises(UndefinedStepError):
        pade_multiplier(math.nan)


def test_halley_multiplier_examples():
    assert halley_multiplier(1.0) == (2.0, False)
    assert halley_multiplier(3.0) == (-2.0, True)
    assert halley_multiplier(0.0) == (1.0, False)
    with pytest.raises(PoleError):
        halley_multiplier(2.0)
    with pytest.raises(UndefinedStepError):
        halley_multiplier(math.nan)


def test_multipliers_are_positive():
    rng = np.random.default_rng(20240601)
    grid = np.linspace(-1e6, 700.0, 20001)
    samples = np.concatenate([
        grid,
        rng.uniform(-50.0, 50.0, 2000),
        -np.power(10.0, rng.uniform(-300, 300, 1000)),
        np.power(10.0, rng.uniform(-300, np.log10(700.0), 1000)),
    ])
    for q in samples:
        q = float(q)
        assert exp_multiplier(q) > 0.0
        assert pade_multiplier(q) > 0.0


def test_maclaurin_consistency():
    rng = np.random.default_rng(7)
    for q in np.concatenate([rng.uniform(-1.0, 1.0, 2000), [-1.0, 0.0, 1.0]]):
        q = float(q)
        slack = 1e-15
        assert abs(exp_multiplier(q) - (1.0 + q / 2.0)) <= q * q + slack
        assert abs(pade_multiplier(q) - (1.0 + q / 2.0)) <= q * q + slack
        assert abs(exp_multiplier(q) - (1.0 + q / 2.0 + q * q / 6.0)) <= abs(q) ** 3 + slack


def test_pade_branches_meet_at_zero_and_match_halley_below():
    assert pade_multiplier(0.0) == pade_multiplier(-0.0) == exp_multiplier(0.0) == 1.0
    assert pade_multiplier(1e-12) == pytest.approx(1.0, abs=1e-11)
    assert pade_multiplier(-1e-12) == pytest.approx(1.0, abs=1e-11)
    rng = np.random.default_rng(11)
    for q in rng.uniform(-1e3, 0.0, 1000):
        q = float(q)
        assert pade_multiplier(q) == halley_multiplier(q)[0]


# ---------------------------------------------------------------------------
# step
# ---------------------------------------------------------------------------

def test_step_examples_on_sqrt612():
    problem = sqrt612()
    x_next, diag = step(Method.NEWTON, 10.0, problem.evaluate(10.0))
    assert x_next == pytest.approx(35.6)
    assert diag.multiplier == 1.0

    x_next, diag = step(Method.HNR2, 10.0, problem.evaluate(10.0))
    assert x_next == pytest.approx(21.228070, abs=1e-5)
    assert diag.q == pytest.approx(-2.56)
    assert diag.newton_step == pytest.approx(25.6)
    assert diag.applied_step == pytest.approx(diag.newton_step * diag.multiplier)


def test_step_at_cubic_turning_points():
    problem = cubic_cycle()
    t = CUBIC_TURNING_POINT

    jet = problem.evaluate(-t)
    assert jet.d1 == 0.0
    for method in (Method.HNR1, Method.HNR2, Method.HALLEY):
        x_next, diag = step(method, -t, jet)
        assert x_next == -t
        assert diag.stationary
        assert diag.q == -math.inf
        assert not diag.direction_reversed

    for method in Method:
        with pytest.raises(UndefinedStepError):
            step(method, t, problem.evaluate(t))


def test_newton_flips_between_zero_and_one_on_cubic():
    problem = cubic_cycle()
    x1, _ = step(Method.NEWTON, 0.0, problem.evaluate(0.0))
    assert x1 == pytest.approx(1.0, abs=1e-15)
    x2, _ = step(Method.NEWTON, 1.0, problem.evaluate(1.0))
    assert x2 == pytest.approx(0.0, abs=1e-15)


def test_newton_undefined_at_zero_derivative():
    with pytest.raises(UndefinedStepError):
        step(Method.NEWTON, 0.0, Jet2(1.0, 0.0, -1.0))


def test_halley_reverses_where_the_others_do_not():
    steep = Jet2(1.0, 1.0, 3.0)
    x_halley, diag = step(Method.HALLEY, 0.0, steep)
    assert x_halley == pytest.approx(2.0)
    assert diag.direction_reversed
    assert step(Method.HNR1, 0.0, steep)[0] == pytest.approx(-(math.exp(3.0) - 1.0) / 3.0)
    assert step(Method.HNR2, 0.0, steep)[0] == -4.0

    x_exact, diag = step(Method.HALLEY, 0.0, Jet2(1.0, 1.0, 1.0))
    assert x_exact == -2.0
    assert not diag.direction_reversed

    with pytest.raises(PoleError):
        step(Method.HALLEY, 0.0, Jet2(1.0, 1.0, 2.0))


def test_direction_contract_for_hnr_methods():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 1000:
        value, d1, d2 = rng.normal(0.0, 3.0, 3)
        jet = Jet2(float(value), float(d1), float(d2))
        q = curvature_q(jet)
        if value == 0.0 or not abs(q) <= 700.0:
            continue
        expected = -math.copysign(1.0, value / d1)
        for method in (Method.HNR1, Method.HNR2):
            x_next, diag = step(method, 0.0, jet)
            assert math.copysign(1.0, x_next) == expected
            assert not diag.direction_reversed
        checked += 1


# ---------------------------------------------------------------------------
# One-step exactness
# ---------------------------------------------------------------------------

def _signed(rng, lo, hi):
    return float(rng.choice([-1.0, 1.0]) * rng.uniform(lo, hi))


def test_newton_exact_on_affine():
    rng = np.random.default_rng(101)
    for _ in range(1000):
        alpha, beta, x0 = _signed(rng, 0.1, 10.0), float(rng.uniform(-10, 10)), float(rng.uniform(-100, 100))
        problem = affine(alpha, beta)
        root = problem.known_roots[0]
        x1, _ = step(Method.NEWTON, x0, problem.evaluate(x0))
        assert abs(x1 - root) <= 1e-12 * max(1.0, abs(x0), abs(root))


def test_halley_exact_on_mobius():
    rng = np.random.default_rng(202)
    accepted = 0
    while accepted < 1000:
        root = float(rng.uniform(-10.0, 10.0))
        offset = _signed(rng, 0.5, 20.0)
        pole = root + offset
        alpha, gamma = _signed(rng, 0.25, 4.0), _signed(rng, 0.25, 4.0)
        beta, delta = -alpha * root, -gamma * pole
        det = alpha * delta - beta * gamma
        if abs(det) <= 0.25:
            continue
        x0 = root + float(rng.uniform(-3.0, 0.8)) * (pole - root)
        problem = mobius(alpha, beta, gamma, delta)
        if not problem.domain.contains(x0):
            continue
        exact = problem.known_roots[0]
        x1, _ = step(Method.HALLEY, x0, problem.evaluate(x0))
        assert abs(x1 - exact) <= 1e-12 * max(1.0, abs(x0), abs(exact))
        accepted += 1


def test_hnr1_exact_on_log_family_to_four_ulps():
    rng = np.random.default_rng(303)
    for _ in range(1000):
        a = _signed(rng, 0.1, 10.0)
        b = float(rng.choice([-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0]))
        c = float(rng.uniform(-2.0, 0.0))
        u0 = float(rng.uniform(0.95, 1.05))
        x0 = (u0 - c) / b
        problem = log_family(a, b, c)
        root = (1.0 - c) / b
        assert problem.known_roots[0] == root
        x1, _ = step(Method.HNR1, x0, problem.evaluate(x0))
        assert abs(x1 - root) <= 4 * math.ulp(root)


def test_hnr1_exact_on_log_family_far_from_root():
    rng = np.random.default_rng(404)
    for _ in range(1000):
        a = _signed(rng, 0.1, 10.0)
        b = _signed(rng, 0.5, 4.0)
        c = float(rng.uniform(-2.0, 2.0))
        u0 = float(np.exp(rng.uniform(np.log(0.01), np.log(100.0))))
        x0 = (u0 - c) / b
        problem = log_family(a, b, c)
        if not problem.domain.contains(x0):
            continue
        root = problem.known_roots[0]
        x1, _ = step(Method.HNR1, x0, problem.evaluate(x0))
        assert abs(x1 - root) <= 1e-11 * max(1.0, abs(x0), abs(root))
