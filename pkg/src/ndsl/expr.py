"""Tiny arithmetic expression language used for coefficient pieces.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | 'pi' | 'x' | FUNC '(' expr ')' | '(' expr ')'

``-x^2`` therefore parses as ``-(x^2)`` and ``2^3^2`` as ``2^(3^2)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")


class ExpressionError(ValueError):
    """Base class for parse and evaluation failures."""


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class ExpressionDomainError(ExpressionError):
    pass


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Pi, Var, Neg, BinOp, Call]


def _has_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return _has_var(node.operand)
    if isinstance(node, BinOp):
        return _has_var(node.left) or _has_var(node.right)
    if isinstance(node, Call):
        return _has_var(node.arg)
    return False


def _sqrt(z):
    if np.any(np.asarray(z) < 0):
        raise ExpressionDomainError("sqrt of negative argument")
    return np.sqrt(z)


def _div(num, den):
    if np.any(np.asarray(den) == 0):
        raise ExpressionDomainError("division by zero")
    return num / den


def _pow(base, expo):
    with np.errstate(all="ignore"):
        out = np.power(np.asarray(base, dtype=float), expo)
    if not np.all(np.isfinite(out)):
        raise ExpressionDomainError("power undefined or overflowing")
    return out


_FUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": _sqrt,
    "abs": np.abs,
}

_BINOPS: dict[str, Callable] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": _pow,
}


def _evaluate(node: Node, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_evaluate(node.operand, x)
    if isinstance(node, BinOp):
        return _BINOPS[node.op](_evaluate(node.left, x), _evaluate(node.right, x))
    return _FUNCS[node.func](_evaluate(node.arg, x))


def _to_text(node: Node) -> str:
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{_to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_to_text(node.left)} {node.op} {_to_text(node.right)})"
    return f"{node.func}({_to_text(node.arg)})"


@dataclass(frozen=True)
class Expression:
    """Parsed expression in the single variable ``x``.

    Calling the expression evaluates it on a float or a numpy array.
    Constant expressions (no ``x`` anywhere) carry their folded value.
    """

    root: Node
    source: str = field(default="", compare=False)
    is_constant: bool = field(init=False, compare=False)
    constant_value: float | None = field(init=False, compare=False)

    def __post_init__(self):
        const = not _has_var(self.root)
        object.__setattr__(self, "is_constant", const)
        value = None
        if const:
            folded = _evaluate(self.root, 0.0)
            value = float(folded)
            if not math.isfinite(value):
                raise ExpressionDomainError(f"constant expression is not finite: {self.source!r}")
        object.__setattr__(self, "constant_value", value)

    def __call__(self, x):
        if self.is_constant:
            if np.ndim(x) == 0:
                return self.constant_value
            return np.full(np.shape(x), self.constant_value)
        with np.errstate(all="ignore"):
            out = _evaluate(self.root, x)
        if not np.all(np.isfinite(out)):
            raise ExpressionDomainError(f"non-finite value of {self.to_text()!r}")
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)

    def to_text(self) -> str:
        return _to_text(self.root)

    def __str__(self) -> str:
        return self.source or self.to_text()


def constant(value: float) -> Expression:
    return Expression(Num(float(value)), source=repr(float(value)))


def _subst(node: Node, repl: Node) -> Node:
    if isinstance(node, Var):
        return repl
    if isinstance(node, Neg):
        return Neg(_subst(node.operand, repl))
    if isinstance(node, BinOp):
        return BinOp(node.op, _subst(node.left, repl), _subst(node.right, repl))
    if isinstance(node, Call):
        return Call(node.func, _subst(node.arg, repl))
    return node


def reflect(expr: Expression, s: float) -> Expression:
    """The expression with x replaced by (s - x)."""
    if expr.is_constant:
        return expr
    node = _subst(expr.root, BinOp("-", Num(float(s)), Var()))
    return Expression(node, source=_to_text(node))


def combine(op: str, left: Expression, right: Expression) -> Expression:
    """Build ``left op right`` without going through text."""
    node = BinOp(op, left.root, right.root)
    return Expression(node, source=_to_text(node))


# -- tokenizer / parser ------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, pos = self.tok
        if val != value or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise ExpressionSyntaxError(f"expected {value!r}, found {what}", pos)
        self.i += 1

    def expr(self) -> Node:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.take()
            return Neg(self.unary())
        if self.tok[0] == "op" and self.tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "pi":
                return Pi()
            if val == "x":
                return Var()
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExpressionSyntaxError(f"unexpected {what}", pos)


def parse_expression(text: str) -> Expression:
    """Parse ``text`` into an :class:`Expression`.

    Raises :class:`ExpressionSyntaxError` (with ``offset``) on malformed
    input and :class:`UnknownIdentifierError` on names outside the language.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    parser = _Parser(text)
    node = parser.expr()
    kind, val, pos = parser.tok
    if kind != "end":
        raise ExpressionSyntaxError(f"unexpected {val!r}", pos)
    return Expression(node, source=text)
