import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hh3.errors import DomainError, ExprSyntaxError, UnknownIdentifier
from hh3.expr import (BinOp, Const, Func, Jet3, Neg, Num, Var, _div, _mul,
                      eval_jet3, evaluate, parse, to_text)


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

def test_parse_structure():
    assert parse("2*x^3 - 1") == BinOp(
        "-",
        BinOp("*", Num(2.0), BinOp("^", Var(), Num(3.0))),
        Num(1.0),
    )


def test_parse_constants():
    assert parse("pi") == Const("pi")
    assert evaluate(parse("pi"), 0.0) == math.pi
    assert evaluate(parse("e"), 0.0) == math.e


@pytest.mark.parametrize("source,x,value", [
    ("2*x^3 - 1", 2.0, 15.0),
    ("exp(2*x)", 0.5, math.e),
    ("x^-2", 2.0, 0.25),
    ("-x^2", 3.0, -9.0),          # unary minus binds looser than ^
    ("x^2^3", 2.0, 256.0),        # right associative
    ("1 - x - x", 1.0, -1.0),     # left associative
    ("6/3/2", 0.0, 1.0),
    ("2e-1 + .5", 0.0, 0.7),
    ("sqrt(x)*sqrt(x)", 9.0, 9.0),
    ("sin(x)^2 + cos(x)^2", 0.7, 1.0),
    ("(x + 1)*(x - 1)", 3.0, 8.0),
])
def test_evaluate(source, x, value):
    assert evaluate(parse(source), x) == pytest.approx(value, rel=1e-15)


def test_syntax_error_offset_and_expected():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x^")
    assert info.value.offset == 2
    assert any("number" in item for item in info.value.expected)


@pytest.mark.parametrize("source,offset", [
    ("(x", 2),
    ("x +", 3),
    ("* x", 0),
    ("exp x", 4),
    ("x $ 2", 2),
    ("", 0),
])
def test_syntax_errors(source, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(source)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier) as info:
        parse("foo(x)")
    assert info.value.name == "foo"
    assert info.value.offset == 0
    with pytest.raises(UnknownIdentifier):
        parse("x + y")


def test_trailing_garbage():
    with pytest.raises(ExprSyntaxError):
        parse("x 2")


# --------------------------------------------------------------------------
# printing round trip
# --------------------------------------------------------------------------

@pytest.mark.parametrize("source", [
    "x", "-x^2", "x^-2", "x^2^3", "(x^2)^3", "1 - (x - 1)",
    "x/(x + 1)", "exp(x) + exp(2*x)", "-(x*x)", "2*x^3 - 1",
    "sqrt(x + 4)", "pi*x + e",
])
def test_round_trip_examples(source):
    ast = parse(source)
    assert parse(to_text(ast)) == ast


def _ast_strategy():
    # canonical literals are non-negative (the parser renders minus as Neg),
    # and abs() also squashes -0.0, whose repr would re-parse as Neg(0.0)
    leaf = st.one_of(
        st.just(Var()),
        st.builds(Num, st.floats(min_value=0.0, max_value=100.0,
                                 allow_nan=False).map(abs)),
        st.sampled_from([Const("pi"), Const("e")]),
    )

    def extend(children):
        return st.one_of(
            st.builds(Neg, children),
            st.builds(lambda op, l, r: BinOp(op, l, r),
                      st.sampled_from(["+", "-", "*", "/", "^"]),
                      children, children),
            st.builds(lambda name, arg: Func(name, arg),
                      st.sampled_from(["exp", "log", "sin", "cos", "sqrt"]),
                      children),
        )

    return st.recursive(leaf, extend, max_leaves=25)


@settings(max_examples=200, deadline=None)
@given(_ast_strategy())
def test_round_trip_property(ast):
    assert parse(to_text(ast)) == ast


# --------------------------------------------------------------------------
# jets
# --------------------------------------------------------------------------

@pytest.mark.parametrize("source,x,jet", [
    ("exp(x)", 0.0, (1.0, 1.0, 1.0, 1.0)),
    ("x^3", 2.0, (8.0, 12.0, 12.0, 6.0)),
    ("1/x", 1.0, (1.0, -1.0, 2.0, -6.0)),
])
def test_jet_examples(source, x, jet):
    assert eval_jet3(parse(source), x).entries() == jet


def test_evaluate_is_jet_value_component():
    ast = parse("exp(x)*sin(x)")
    for x in (0.1, 1.0, 2.5):
        assert evaluate(ast, x) == eval_jet3(ast, x).d0


_SMOOTH_CASES = [
    ("exp(x)", 0.0, 1.0),
    ("exp(2*x)", -1.0, 1.0),
    ("exp(x) + exp(2*x)", 0.0, 1.0),
    ("1/x", 1.0, 2.0),
    ("x^4 - 2*x^2 + x", -1.0, 1.0),
    ("sin(x)*cos(2*x)", 0.0, 3.0),
    ("log(x + 2)", 0.0, 4.0),
    ("sqrt(x + 1)*exp(-x)", 0.5, 2.0),
    ("x^2.5", 1.0, 3.0),
    ("(1 + x^2)^-1", -1.0, 1.0),
    ("x^x", 0.5, 2.0),
]


# The finite-difference oracle runs in 60-digit arithmetic (mpmath), through
# an independent evaluator for the same AST.  In doubles a third central
# difference at step 1e-5 would carry O(eps/h^3) = O(1) relative rounding
# error, so the tolerances below are only meaningful against a
# high-precision function oracle; with one, they are limited by the h^2
# truncation term (~1e-10) plus the double rounding of the jets themselves.

def _mp_eval(node, x):
    import mpmath
    if isinstance(node, Num):
        return mpmath.mpf(node.value)
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return mpmath.pi if node.name == "pi" else mpmath.e
    if isinstance(node, Neg):
        return -_mp_eval(node.operand, x)
    if isinstance(node, Func):
        return getattr(mpmath, node.name)(_mp_eval(node.arg, x))
    assert isinstance(node, BinOp)
    left = _mp_eval(node.left, x)
    right = _mp_eval(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return left / right
    return left ** right


@pytest.mark.parametrize("source,a,b", _SMOOTH_CASES)
def test_jets_match_finite_differences(source, a, b):
    import mpmath
    ast = parse(source)
    rng = random.Random(20240811)
    with mpmath.workdps(60):
        h = mpmath.mpf("1e-5")
        margin = 4e-5
        for _ in range(25):
            x = rng.uniform(a + margin, b - margin)
            jet = eval_jet3(ast, x)
            # absolute floors (scaled to the jet's own magnitude) take over
            # where a derivative crosses zero and relative error is moot
            scale = max(1.0, *(abs(v) for v in jet.entries()))
            xm = mpmath.mpf(x)
            f = [_mp_eval(ast, xm + k * h) for k in (-2, -1, 0, 1, 2)]
            d1 = float((f[3] - f[1]) / (2 * h))
            d2 = float((f[3] - 2 * f[2] + f[1]) / (h * h))
            d3 = float((f[4] - 2 * f[3] + 2 * f[1] - f[0]) / (2 * h ** 3))
            assert jet.d0 == pytest.approx(float(f[2]), rel=1e-14,
                                           abs=1e-12 * scale)
            assert jet.d1 == pytest.approx(d1, rel=1e-6, abs=1e-8 * scale)
            assert jet.d2 == pytest.approx(d2, rel=1e-6, abs=1e-8 * scale)
            assert jet.d3 == pytest.approx(d3, rel=1e-4, abs=1e-6 * scale)


def test_jet_linearity():
    f = parse("exp(x)")
    g = parse("x^3")
    combined = parse("2*exp(x) + 3*x^3")
    for x in (0.0, 0.5, 1.3):
        jf, jg, jc = eval_jet3(f, x), eval_jet3(g, x), eval_jet3(combined, x)
        for want, got in zip(
                (2 * a + 3 * b for a, b in zip(jf.entries(), jg.entries())),
                jc.entries()):
            assert got == pytest.approx(want, rel=1e-13, abs=1e-13)


_finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(_finite, _finite, _finite, _finite, _finite, _finite, _finite, _finite)
def test_jet_product_rule(a0, a1, a2, a3, b0, b1, b2, b3):
    a = Jet3(a0, a1, a2, a3)
    b = Jet3(b0, b1, b2, b3)
    product = _mul(a, b)
    assert product.d0 == a0 * b0
    assert product.d1 == pytest.approx(a1 * b0 + a0 * b1, rel=1e-15, abs=1e-12)
    assert product.d2 == pytest.approx(a2 * b0 + 2 * a1 * b1 + a0 * b2,
                                       rel=1e-15, abs=1e-12)
    assert product.d3 == pytest.approx(
        a3 * b0 + 3 * a2 * b1 + 3 * a1 * b2 + a0 * b3,
        rel=1e-15, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(_finite, _finite, _finite, _finite,
       st.floats(min_value=0.5, max_value=100.0), _finite, _finite, _finite)
def test_jet_quotient_inverts_product(a0, a1, a2, a3, b0, b1, b2, b3):
    a = Jet3(a0, a1, a2, a3)
    b = Jet3(b0, b1, b2, b3)
    quotient = _div(a, b)
    back = _mul(quotient, b)
    scale = max(1.0, *(abs(v) for v in a.entries()),
                *(abs(v) for v in quotient.entries()))
    for got, want in zip(back.entries(), a.entries()):
        assert got == pytest.approx(want, abs=1e-10 * scale)


def test_pow_on_negative_base_integer_exponent():
    jet = eval_jet3(parse("x^3"), -2.0)
    assert jet.entries() == (-8.0, 12.0, -12.0, 6.0)
    assert evaluate(parse("x^-2"), -2.0) == 0.25


# --------------------------------------------------------------------------
# domain errors
# --------------------------------------------------------------------------

@pytest.mark.parametrize("source,x,fragment", [
    ("log(x)", 0.0, "log"),
    ("log(x - 1)", 0.5, "log"),
    ("sqrt(x)", -1.0, "sqrt"),
    ("sqrt(x)", 0.0, "sqrt"),       # derivative jet blows up at 0
    ("1/x", 0.0, "division"),
    ("x^0.5", -1.0, "exponent"),
    ("x^x", -1.0, "exponent"),
    ("exp(x^2)", 1e6, "overflow"),
])
def test_domain_errors(source, x, fragment):
    with pytest.raises(DomainError) as info:
        eval_jet3(parse(source), x)
    assert fragment in str(info.value)


def test_domain_error_names_offending_node():
    with pytest.raises(DomainError) as info:
        eval_jet3(parse("exp(x) + log(x - 2)"), 1.0)
    assert info.value.expr_text == "log(x - 2.0)"
    assert info.value.x == 1.0


def test_nonfinite_point_rejected():
    with pytest.raises(DomainError):
        eval_jet3(parse("x"), math.inf)


def test_huge_product_is_domain_error():
    with pytest.raises(DomainError):
        evaluate(parse("x*x"), 1e200)
