import math

import numpy as np
import pytest

import problems
from expr_parser import eval_jet, parse
from problems import Domain, UnknownProblemError, catalog, get_problem


def test_catalog_has_every_reference_problem():
    names = [p.name for p in catalog()]
    for name in ["sqrt612", "tanh", "cubic_cycle", "fractal_cubic", "log_family", "mobius", "affine"]:
        assert name in names

    by_name = {p.name: p for p in catalog()}
    assert by_name["fractal_cubic"].known_roots == [-3.0, 1.0, 4.0]
    assert by_name["cubic_cycle"].known_roots[0] == pytest.approx(-1.769292, abs=1e-6)
    assert by_name["sqrt612"].known_roots[0] == pytest.approx(24.738633753705963, rel=1e-15)
    assert by_name["tanh"].known_roots == [0.0]


@pytest.mark.parametrize("problem", catalog(), ids=lambda p: p.name)
def test_known_roots_are_roots_inside_the_domain(problem):
    for root in problem.known_roots:
        assert problem.domain.contains(root)
        assert abs(problem.evaluate(root).value) <= 1e-10 * (1.0 + abs(root))


def _sample_domain(rng, domain: Domain, n: int):
    lo = domain.lo if math.isfinite(domain.lo) else -6.0
    hi = domain.hi if math.isfinite(domain.hi) else 6.0
    if math.isfinite(domain.lo) and not math.isfinite(domain.hi):
        hi = domain.lo + 12.0
    if math.isfinite(domain.hi) and not math.isfinite(domain.lo):
        lo = domain.hi - 12.0
    points = rng.uniform(lo, hi, 4 * n)
    # stay clear of the edge where log/Mobius terms blow up
    points = [float(x) for x in points if min(abs(x - domain.lo), abs(x - domain.hi)) > 0.05]
    return points[:n]


@pytest.mark.parametrize("problem", catalog() + [
    problems.log_family(2.5, -0.5, 3.0),
    problems.mobius(1.0, -2.0, 3.0, 4.0),
    problems.affine(-0.5, 7.0),
], ids=lambda p: f"{p.name}:{p.formula}")
def test_hand_coded_jets_agree_with_the_expression_parser(problem):
    rng = np.random.default_rng(31)
    ast = parse(problem.formula)
    points = _sample_domain(rng, problem.domain, 100)
    assert len(points) == 100
    for x in points:
        hand = problem.evaluate(x)
        auto = eval_jet(ast, x)
        np.testing.assert_allclose(
            [auto.value, auto.d1, auto.d2],
            [hand.value, hand.d1, hand.d2],
            rtol=1e-12,
            atol=1e-12 * (1.0 + abs(x) ** 3),
        )


def test_cubic_turning_points_have_exactly_zero_slope():
    problem = problems.cubic_cycle()
    t = problems.CUBIC_TURNING_POINT
    assert problem.evaluate(t).d1 == 0.0
    assert problem.evaluate(-t).d1 == 0.0


def test_tanh_jet_stays_finite_far_out():
    jet = problems.tanh_problem().evaluate(-800.0)
    assert (jet.value, jet.d1) == (-1.0, 0.0)


def test_family_domains_hold_the_root_side():
    log_problem = problems.log_family(1.0, -2.0, 1.0)
    assert log_problem.domain == Domain(-math.inf, 0.5)
    assert log_problem.known_roots == [0.0]

    mob = problems.mobius()
    assert mob.domain == Domain(-math.inf, 2.0)
    assert mob.known_roots == [-2.0]
    assert problems.mobius(1.0, -1.0, 1.0, 0.0).domain == Domain(0.0, math.inf)


def test_family_parameters_are_validated():
    with pytest.raises(ValueError):
        problems.log_family(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        problems.mobius(1.0, 2.0, 2.0, 4.0)
    with pytest.raises(ValueError):
        problems.affine(0.0, 1.0)


def test_get_problem_by_name_and_params():
    assert get_problem("sqrt612").name == "sqrt612"
    family = get_problem("log_family", [2.0, 0.5, -1.0])
    assert family.params == {"a": 2.0, "b": 0.5, "c": -1.0}
    assert family.known_roots == [4.0]
    with pytest.raises(ValueError, match="takes"):
        get_problem("tanh", [1.0])
    with pytest.raises(ValueError, match="takes"):
        get_problem("affine", [1.0, 2.0, 3.0])


def test_unknown_problem_suggests_a_name():
    with pytest.raises(UnknownProblemError) as err:
        get_problem("fractal_cubik")
    assert err.value.suggestion == "fractal_cubic"
    assert "did you mean 'fractal_cubic'" in str(err.value)
    assert isinstance(err.value, KeyError)


def test_nearest_root_index():
    problem = problems.fractal_cubic()
    assert problem.nearest_root_index(4.0 + 1e-9) == 2
    assert problem.nearest_root_index(-3.0) == 0
    assert problem.nearest_root_index(2.0) is None
