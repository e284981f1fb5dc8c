"""Tiny arithmetic expression language for rate and survival functions.

Grammar (recursive descent, one variable ``x``):

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right associative
    atom    := NUMBER | "x" | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Known functions: ``exp``, ``log`` (natural), ``pow``.  Nothing else: no
conditionals, no user definitions, no extra variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExpressionSyntaxError",
    "ExpressionDomainError",
    "Expression",
    "parse",
]


class ExpressionSyntaxError(ValueError):
    """Raised when the source text does not match the grammar."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExpressionDomainError(ArithmeticError):
    """Raised when a scalar evaluation leaves the real domain (e.g. log of a negative)."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str  # exp | log | pow
    args: tuple


Node = Num | Var | Neg | BinOp | Call

_FUNCTIONS = {"exp": 1, "log": 1, "pow": 2}


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_CHARS = set("+-*/^(),")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, lexeme, offset) triples. Kinds: num, name, op."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _TOKEN_CHARS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            seen_exp = False
            while j < n:
                d = text[j]
                if d.isdigit() or d == ".":
                    j += 1
                elif d in "eE" and not seen_exp:
                    # exponent part, optionally signed
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        seen_exp = True
                        j = k
                    else:
                        break
                else:
                    break
            lexeme = text[i:j]
            try:
                float(lexeme)
            except ValueError:
                raise ExpressionSyntaxError(f"bad number {lexeme!r}", i) from None
            tokens.append(("num", lexeme, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, lexeme: str):
        kind, lex, off = self.peek()
        if kind != "op" or lex != lexeme:
            raise ExpressionSyntaxError(f"expected {lexeme!r}", off)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, lex, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {lex!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, lex, _ = self.peek()
            if kind == "op" and lex in "+-":
                self.advance()
                node = BinOp(lex, node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, lex, _ = self.peek()
            if kind == "op" and lex in "*/":
                self.advance()
                node = BinOp(lex, node, self.unary())
            else:
                return node

    def unary(self) -> Node:
        kind, lex, _ = self.peek()
        if kind == "op" and lex == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, lex, _ = self.peek()
        if kind == "op" and lex == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, lex, off = self.advance()
        if kind == "num":
            return Num(float(lex))
        if kind == "name":
            if lex == "x":
                return Var()
            if lex in _FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    k, l, o = self.peek()
                    if k == "op" and l == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != _FUNCTIONS[lex]:
                    raise ExpressionSyntaxError(
                        f"{lex} takes {_FUNCTIONS[lex]} argument(s), got {len(args)}", off
                    )
                return Call(lex, tuple(args))
            raise ExpressionSyntaxError(f"unknown name {lex!r}", off)
        if kind == "op" and lex == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionSyntaxError(f"unexpected {lex!r}" if lex else "unexpected end of input", off)


def _eval_node(node: Node, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval_node(node.operand, x)
    if isinstance(node, BinOp):
        a = _eval_node(node.left, x)
        b = _eval_node(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return np.power(a, b)
    # Call
    if node.name == "exp":
        return np.exp(_eval_node(node.args[0], x))
    if node.name == "log":
        return np.log(_eval_node(node.args[0], x))
    return np.power(_eval_node(node.args[0], x), _eval_node(node.args[1], x))


def _format_node(node: Node) -> str:
    """Fully parenthesized canonical form; re-parsing it gives the same values."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{_format_node(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_format_node(node.left)}{node.op}{_format_node(node.right)})"
    args = ",".join(_format_node(a) for a in node.args)
    return f"{node.name}({args})"


class Expression:
    """A parsed expression; callable on scalars and numpy arrays.

    Scalar evaluation raises :class:`ExpressionDomainError` when the result is
    not a finite real produced in-domain (log of a negative, 0/0, ...).
    Overflow to +/-inf is allowed and passed through.  Array evaluation
    propagates nan/inf instead of raising.
    """

    __slots__ = ("source", "root")

    def __init__(self, source: str, root: Node):
        self.source = source
        self.root = root

    def __call__(self, x):
        if np.ndim(x) == 0:
            with np.errstate(all="ignore"):
                v = _eval_node(self.root, float(x))
            v = float(v)
            if math.isnan(v):
                raise ExpressionDomainError(
                    f"{self.source!r} is undefined at x={float(x)!r}"
                )
            return v
        with np.errstate(all="ignore"):
            return np.asarray(_eval_node(self.root, np.asarray(x, dtype=float)))

    def pretty(self) -> str:
        return _format_node(self.root)

    def __repr__(self):
        return f"Expression({self.source!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and self.root == other.root

    def __hash__(self):
        return hash(self.pretty())


def parse(text: str) -> Expression:
    """Parse ``text`` and return a callable :class:`Expression`.

    Raises :class:`ExpressionSyntaxError` (with a character offset) on any
    input outside the grammar.
    """
    if not isinstance(text, str):
        raise ExpressionSyntaxError("expression source must be a string", 0)
    return Expression(text, _Parser(text).parse())
