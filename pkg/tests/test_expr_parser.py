import math

import numpy as np
import pytest

from expr_parser import (
    Binary,
    Const,
    EvaluationDomainError,
    ExprParseError,
    Unary,
    UnknownFunctionError,
    Var,
    eval_jet,
    evaluate,
    expression_problem,
    parse,
)
from kernels import NonFiniteJetError


def test_parse_examples():
    assert parse("x^2 - 612") == Binary("-", Binary("^", Var(), Const(2.0)), Const(612.0))
    assert parse("tanh(x)") == Unary("tanh", Var())
    assert parse("x^3 - 2*x + 2") == Binary(
        "+",
        Binary("-", Binary("^", Var(), Const(3.0)), Binary("*", Const(2.0), Var())),
        Const(2.0),
    )


def test_parse_errors_are_positioned():
    with pytest.raises(ExprParseError) as err:
        parse("x^^2")
    assert err.value.position == 2

    with pytest.raises(ExprParseError) as err:
        parse("x^")
    assert err.value.position == 2

    with pytest.raises(ExprParseError) as err:
        parse("(x + 1")
    assert err.value.position == 6

    with pytest.raises(ExprParseError) as err:
        parse("2 $ x")
    assert err.value.position == 2

    with pytest.raises(ExprParseError) as err:
        parse("   ")
    assert err.value.position == 3


def test_pointer_marks_the_error():
    with pytest.raises(ExprParseError) as err:
        parse("x^^2")
    assert err.value.pointer("x^^2") == "x^^2\n  ^"


def test_unknown_function_suggests_a_name():
    with pytest.raises(UnknownFunctionError) as err:
        parse("sinn(x)")
    assert err.value.name == "sinn"
    assert err.value.suggestion == "sin"
    assert err.value.position == 0
    assert "did you mean 'sin'" in str(err.value)

    with pytest.raises(UnknownFunctionError) as err:
        parse("x + qqqq")
    assert err.value.suggestion is None


def test_unary_minus_binds_tighter_than_power():
    assert parse("-x^2") == Binary("^", Unary("neg", Var()), Const(2.0))
    assert eval_jet(parse("-x^2"), 3.0).value == 9.0
    assert eval_jet(parse("-(x^2)"), 3.0).value == -9.0


def test_power_is_right_associative_and_folded():
    assert parse("x^3^2") == Binary("^", Var(), Const(9.0))
    assert parse("x^-1") == Binary("^", Var(), Const(-1.0))
    assert parse("x^(1/2)") == Binary("^", Var(), Const(0.5))
    with pytest.raises(ExprParseError) as err:
        parse("2^x")
    assert err.value.position == 2
    with pytest.raises(ExprParseError):
        parse("x^log(0 - 1)")


def test_constants_and_unicode_minus():
    assert evaluate(parse("pi"), 0.0) == math.pi
    assert evaluate(parse("e"), 0.0) == math.e
    assert evaluate(parse("x − 1"), 3.0) == 2.0
    assert evaluate(parse("1.5e2 + .5"), 0.0) == 150.5


def test_rendering_reparses_to_the_same_tree():
    for text in ["x^2 - 612", "-x^2", "(x - 1)/(x + 1)", "x^3^2", "exp(-(x - 1))",
                 "x - (x - 1)", "x / (x / 2)", "(-x)^2", "sqrt(x^2 + 1) * log(x)"]:
        ast = parse(text)
        assert parse(str(ast)) == ast


def test_eval_jet_examples():
    j = eval_jet(parse("x^2 - 612"), 10.0)
    assert (j.value, j.d1, j.d2) == (-512.0, 20.0, 2.0)
    j = eval_jet(parse("log(x)"), 5.0)
    assert j.value == pytest.approx(1.6094379124341003)
    assert j.d1 == pytest.approx(0.2)
    assert j.d2 == pytest.approx(-0.04)
    for x in (-3.5, 0.0, 7.25):
        j = eval_jet(parse("x"), x)
        assert (j.value, j.d1, j.d2) == (x, 1.0, 0.0)


def test_eval_jet_domain_errors_name_the_subexpression():
    with pytest.raises(EvaluationDomainError) as err:
        eval_jet(parse("1 + log(x - 2)"), 1.0)
    assert err.value.subexpression == "log(x - 2)"
    with pytest.raises(EvaluationDomainError):
        eval_jet(parse("sqrt(x)"), -1.0)
    with pytest.raises(EvaluationDomainError):
        eval_jet(parse("sqrt(x)"), 0.0)
    with pytest.raises(EvaluationDomainError) as err:
        eval_jet(parse("1/(x - 1)"), 1.0)
    assert err.value.subexpression == "1 / (x - 1)"
    with pytest.raises(EvaluationDomainError):
        eval_jet(parse("x^0.5"), -4.0)
    assert evaluate(parse("sqrt(x)"), 0.0) == 0.0


def test_eval_jet_overflow_is_non_finite():
    with pytest.raises(NonFiniteJetError):
        eval_jet(parse("exp(x)"), 1000.0)
    with pytest.raises(NonFiniteJetError):
        eval_jet(parse("x*x"), 1e200)


def test_depth_limit_keeps_parsing_total():
    with pytest.raises(ExprParseError):
        parse("(" * 5000 + "x" + ")" * 5000)
    with pytest.raises(ExprParseError):
        parse("-" * 5000 + "x")
    with pytest.raises(ExprParseError):
        parse("x" + "^2" * 5000)
    assert str(parse("(" * 100 + "x" + ")" * 100)) == "x"


def test_long_flat_chains_parse_and_evaluate():
    assert evaluate(parse(" + ".join(["x"] * 101)), 1.0) == 101.0

    total = parse(" + ".join(["x"] * 5000))
    assert evaluate(total, 2.0) == 10000.0
    jet = eval_jet(total, 2.0)
    assert (jet.value, jet.d1, jet.d2) == (10000.0, 5000.0, 0.0)
    text = str(total)
    assert str(parse(text)) == text

    product = eval_jet(parse("*".join(["x"] * 101)), 1.0)
    assert (product.value, product.d1, product.d2) == (1.0, 101.0, 10100.0)

    mixed = parse(" - ".join(["x*x"] * 2000))
    assert evaluate(mixed, 3.0) == 9.0 - 9.0 * 1999
    assert str(parse(str(mixed))) == str(mixed)


def test_chain_rendering_keeps_needed_parentheses():
    for text in ["(x + 1) * (x - 2) * 3", "((x + 1) * 2 + 3) * x", "x - (x - 1)", "x / (x * 2)", "(x - 1) ^ 2 * x"]:
        assert str(parse(text)) == text


def test_fuzzed_input_never_crashes():
    rng = np.random.default_rng(99)
    alphabet = list("x0123456789.eE+-*/^() −") + ["sin(", "log(", "pi", "tanh(", "sqrt("]
    for _ in range(300):
        text = "".join(rng.choice(alphabet, size=int(rng.integers(1, 60))))
        try:
            ast = parse(text)
        except ExprParseError:
            continue
        try:
            eval_jet(ast, float(rng.uniform(-3, 3)))
        except (EvaluationDomainError, NonFiniteJetError):
            pass
    big = "".join(rng.choice(list("x1+-*/^() "), size=64 * 1024))
    try:
        parse(big)
    except ExprParseError:
        pass


# ---------------------------------------------------------------------------
# Jet derivatives against finite differences
# ---------------------------------------------------------------------------

def random_safe_expression(rng, depth: int) -> str:
    """Expression text that is defined and smooth for every real x."""
    if depth == 0 or rng.random() < 0.2:
        return "x" if rng.random() < 0.7 else f"{rng.uniform(-2, 2):.3f}"
    a = random_safe_expression(rng, depth - 1)
    kind = int(rng.integers(0, 10))
    if kind == 0:
        return f"sin({a})"
    if kind == 1:
        return f"cos({a})"
    if kind == 2:
        return f"tanh({a})"
    if kind == 3:
        return f"exp(sin({a}))"
    if kind == 4:
        return f"log(({a})^2 + 1)"
    if kind == 5:
        return f"sqrt(({a})^2 + 1)"
    if kind == 6:
        return f"({a})^2"
    b = random_safe_expression(rng, depth - 1)
    if kind == 7:
        return f"({a}) + ({b})"
    if kind == 8:
        return f"({a}) * ({b})"
    return f"({a}) / (({b})^2 + 1)"


def test_jet_matches_finite_differences():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        ast = parse(random_safe_expression(rng, 5))
        x = float(rng.uniform(-2.0, 2.0))
        h = 1e-5 * (1.0 + abs(x))
        f = lambda t: evaluate(ast, t)
        j = eval_jet(ast, x)
        fd1 = (f(x + h) - f(x - h)) / (2 * h)
        fd2 = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)
        scale = 1.0 + abs(j.value)
        np.testing.assert_allclose(j.d1, fd1, rtol=1e-5, atol=1e-5 * scale)
        np.testing.assert_allclose(j.d2, fd2, rtol=1e-5, atol=1e-4 * scale * (1.0 + abs(j.d1)))


def test_jet_value_matches_plain_evaluation():
    rng = np.random.default_rng(4048)
    for _ in range(500):
        ast = parse(random_safe_expression(rng, 5))
        x = float(rng.uniform(-2.0, 2.0))
        value = evaluate(ast, x)
        assert abs(eval_jet(ast, x).value - value) <= 2 * math.ulp(value)


def test_expression_problem_wraps_the_parse():
    problem = expression_problem("x^2 - 612")
    assert problem.name == "expr"
    assert problem.known_roots == []
    assert problem.domain.contains(-1e300)
    assert problem.evaluate(10.0).value == -512.0
