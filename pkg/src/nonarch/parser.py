"""Expression language for field elements and index formulas.

Grammar (precedence climbing, lowest first)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := postfix ('^' unary)?          # right associative
    postfix := atom '!'*
    atom    := INT | NAME | NAME '(' args ')' | '(' expr ')'

``e`` is the infinitesimal, ``w`` its inverse.  Other names are looked up in
the evaluation environment (index variables ``i``, ``j``, ``n`` and scenario
definitions).  The only built-in functions are ``max`` and ``min`` on integers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .field import FieldElement, epsilon, from_rational, omega

__all__ = [
    "ParseError",
    "EvalError",
    "Num",
    "Name",
    "Neg",
    "BinOp",
    "Factorial",
    "Call",
    "parse_expression",
    "evaluate",
    "parse_element",
]


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at offset {position}")
        self.message = message
        self.position = position
        self.text = text


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Factorial:
    operand: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Node = Union[Num, Name, Neg, BinOp, Factorial, Call]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()!,":
                raise ParseError(f"unexpected character {ch!r}", m.start(3), text)
            tokens.append(("op", ch, m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, op: str):
        kind, value, pos = self.take()
        if kind != "op" or value != op:
            what = "end of input" if kind == "end" else repr(value)
            raise ParseError(f"expected {op!r}, found {what}", pos, self.text)

    def error(self, message: str):
        raise ParseError(message, self.peek()[2], self.text)

    def parse(self) -> Node:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", pos, self.text)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and value == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.postfix()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def postfix(self) -> Node:
        node = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "!":
            self.take()
            node = Factorial(node)
        return node

    def atom(self) -> Node:
        kind, value, pos = self.take()
        if kind == "int":
            return Num(int(value))
        if kind == "name":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                self.take()
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                return Call(value, tuple(args))
            return Name(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", pos, self.text)
        raise ParseError(f"unexpected {value!r}", pos, self.text)


def parse_expression(text: str) -> Node:
    """Parse ``text`` into an expression tree; raises ParseError with an offset."""
    return _Parser(text).parse()


def free_names(node: Node) -> set[str]:
    if isinstance(node, Name):
        return {node.name}
    if isinstance(node, Neg) or isinstance(node, Factorial):
        return free_names(node.operand)
    if isinstance(node, BinOp):
        return free_names(node.left) | free_names(node.right)
    if isinstance(node, Call):
        out: set[str] = set()
        for a in node.args:
            out |= free_names(a)
        return out
    return set()


_E = epsilon()
_W = omega()


def _to_int(value: FieldElement, what: str) -> int:
    try:
        return value.as_int()
    except ValueError:
        raise EvalError(f"{what} must be an integer, got {value}") from None


def evaluate(node: Node, env: Mapping[str, object] | None = None) -> FieldElement:
    """Evaluate an expression tree to a field element."""
    env = env or {}
    if isinstance(node, Num):
        return from_rational(node.value)
    if isinstance(node, Name):
        if node.name in env:
            value = env[node.name]
            if isinstance(value, FieldElement):
                return value
            if isinstance(value, int):
                return from_rational(value)
            raise EvalError(f"{node.name!r} is not a field value")
        if node.name == "e":
            return _E
        if node.name == "w":
            return _W
        raise EvalError(f"undefined name {node.name!r}")
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Factorial):
        n = _to_int(evaluate(node.operand, env), "factorial argument")
        if n < 0:
            raise EvalError("factorial of a negative integer")
        return from_rational(math.factorial(n))
    if isinstance(node, Call):
        if node.func in ("max", "min") and node.args:
            vals = [_to_int(evaluate(a, env), node.func + " argument") for a in node.args]
            return from_rational(max(vals) if node.func == "max" else min(vals))
        raise EvalError(f"unknown function {node.func!r}")
    if isinstance(node, BinOp):
        left = evaluate(node.left, env)
        right = evaluate(node.right, env)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right.is_zero():
                raise EvalError("division by zero")
            return left / right
        if node.op == "^":
            k = _to_int(right, "exponent")
            if k < 0 and left.is_zero():
                raise EvalError("division by zero")
            return left ** k
    raise EvalError(f"cannot evaluate {node!r}")


def parse_element(text: str) -> FieldElement:
    """Parse a closed expression (no free index variables) into a field element."""
    return evaluate(parse_expression(text))
