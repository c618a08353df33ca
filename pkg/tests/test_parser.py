from fractions import Fraction

import pytest
from hypothesis import given

from conftest import elements
from nonarch.field import FieldElement, epsilon, from_rational, omega
from nonarch.parser import (
    BinOp,
    Call,
    EvalError,
    Name,
    ParseError,
    evaluate,
    parse_element,
    parse_expression,
)

E = epsilon()


def test_literal_element():
    assert parse_element("(2*e)/(1-e)") == 2 * E / (1 - E)


def test_coefficient_formula():
    node = parse_expression("(-1)^j * e^j")
    assert evaluate(node, {"j": 3}) == -E ** 3
    assert evaluate(node, {"j": 4}) == E ** 4


def test_unbalanced_paren_offset():
    with pytest.raises(ParseError) as info:
        parse_expression("1/(1-e")
    assert info.value.position == 6
    assert "offset 6" in str(info.value)


@pytest.mark.parametrize("text, value", [
    ("1 + 2*3", 7),
    ("2^3^2", 512),
    ("-2^2", -4),
    ("(-2)^2", 4),
    ("3!", 6),
    ("2*3!", 12),
    ("max(2, 5) - min(4, -1)", 6),
    ("7/2/7", Fraction(1, 2)),
    ("10 - 4 - 3", 3),
])
def test_precedence(text, value):
    assert parse_element(text) == from_rational(value)


def test_omega_and_negative_exponents():
    assert parse_element("w") == omega()
    assert parse_element("e^-2") == omega() ** 2
    assert parse_element("2*e^-1 + 3/2*e^2") == 2 * omega() + Fraction(3, 2) * E ** 2


def test_tree_shape():
    node = parse_expression("a(j) + b")
    assert isinstance(node, BinOp) and node.op == "+"
    assert node.left == Call("a", (Name("j"),))


@pytest.mark.parametrize("text, offset", [("1 +", 3), ("2 $ 3", 2), ("(1))", 3), ("", 0)])
def test_errors_carry_position(text, offset):
    with pytest.raises(ParseError) as info:
        parse_expression(text)
    assert info.value.position == offset


@pytest.mark.parametrize("text", ["1/0", "e^(1/2)", "x + 1", "(1/2)!", "foo(1)", "0^-1"])
def test_evaluation_errors(text):
    with pytest.raises(EvalError):
        parse_element(text)


@given(elements())
def test_round_trip(a):
    assert parse_element(str(a)) == a


def test_string_constructor():
    assert FieldElement("1/(1-e)") * (1 - E) == 1
