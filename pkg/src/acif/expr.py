"""A small expression language in one variable ``x``.

Grammar (lowest to highest precedence)::

    expr      := term (('+' | '-') term)*
    term      := unary (('*' | '/') unary)*
    unary     := ('-' | '+') unary | power
    power     := primary ('^' unary)?          # right associative, -x^2 == -(x^2)
    primary   := NUMBER | 'x' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'
               | 'piecewise' '(' branch (',' branch)* ')'
    branch    := expr CMP expr '->' expr | 'else' '->' expr   # else last, required
    CMP       := '<' | '<=' | '>' | '>='
    FUNC      := sin | cos | exp | abs | sqrt | log

Expressions evaluate on floats (via :mod:`math`) or NumPy arrays.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "abs", "sqrt", "log")
CONSTANTS = {"pi": math.pi, "e": math.e}
COMPARISONS = ("<", "<=", ">", ">=")


class ParseError(SyntaxError):
    """Syntax error carrying a 1-based line/column and the expected tokens."""

    def __init__(self, message: str, text: str, pos: int, expected=()):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.column, self.pos = line, col, pos
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at line {line}, column {col}{detail}")


class UnknownIdentifierError(ParseError):
    pass


class EvaluationError(ArithmeticError):
    """Math domain error or overflow during scalar evaluation."""


# --------------------------------------------------------------------- AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


@dataclass(frozen=True)
class Cond:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Piecewise:
    branches: tuple[tuple[Cond, "Node"], ...]
    otherwise: "Node"


Node = Union[Num, Var, Const, Unary, Binary, Call, Piecewise]


# ------------------------------------------------------------------ lexing

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|<=|>=|[-+*/^(),<>])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos,
                             ["number", "identifier", "operator"])
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, expected, message=None):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(message or f"unexpected {found}", self.text, tok.pos, expected)

    def accept(self, *texts):
        if self.tok.kind in ("op", "ident") and self.tok.text in texts:
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, text):
        if self.accept(text) is None:
            self.error([repr(text)])

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "eof":
            self.error(["operator", "end of input"])
        return node

    def expr(self) -> Node:
        node = self.term()
        while (tok := self.accept("+", "-")) is not None:
            node = Binary(tok.text, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while (tok := self.accept("*", "/")) is not None:
            node = Binary(tok.text, node, self.unary())
        return node

    def unary(self) -> Node:
        if (tok := self.accept("-", "+")) is not None:
            return Unary(tok.text, self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.accept("^") is not None:
            return Binary("^", base, self.unary())
        return base

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name == "x":
                return Var()
            if name in CONSTANTS:
                return Const(name)
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name == "piecewise":
                return self.piecewise()
            raise UnknownIdentifierError(
                f"unknown identifier {name!r}", self.text, tok.pos,
                ["x", *CONSTANTS, *FUNCTIONS, "piecewise"])
        if self.accept("(") is not None:
            node = self.expr()
            self.expect(")")
            return node
        self.error(["number", "identifier", "'('", "'-'"])

    def piecewise(self) -> Node:
        self.expect("(")
        branches = []
        while True:
            if self.accept("else") is not None:
                self.expect("->")
                otherwise = self.expr()
                self.expect(")")
                return Piecewise(tuple(branches), otherwise)
            left = self.expr()
            tok = self.accept(*COMPARISONS)
            if tok is None:
                self.error([repr(c) for c in COMPARISONS])
            cond = Cond(tok.text, left, self.expr())
            self.expect("->")
            branches.append((cond, self.expr()))
            if self.accept(",") is None:
                self.error(["','"], "piecewise needs a final 'else -> expr' branch")


def parse_expression(text: str) -> "Expression":
    """Parse ``text`` into an :class:`Expression`."""
    return Expression(_Parser(text).parse(), text)


# -------------------------------------------------------------- evaluation

_BINOPS_SCALAR: dict[str, Callable] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": math.pow,
}
_BINOPS_ARRAY: dict[str, Callable] = {
    "+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power,
}
_FUNCS_SCALAR = {
    "sin": math.sin, "cos": math.cos, "exp": math.exp,
    "abs": abs, "sqrt": math.sqrt, "log": math.log,
}
_FUNCS_ARRAY = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp,
    "abs": np.abs, "sqrt": np.sqrt, "log": np.log,
}
_CMP = {
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}


def _compile(node: Node, vectorized: bool) -> Callable:
    binops = _BINOPS_ARRAY if vectorized else _BINOPS_SCALAR
    funcs = _FUNCS_ARRAY if vectorized else _FUNCS_SCALAR
    if isinstance(node, Num):
        v = node.value
        return lambda x: v
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Const):
        v = CONSTANTS[node.name]
        return lambda x: v
    if isinstance(node, Unary):
        f = _compile(node.operand, vectorized)
        return (lambda x: -f(x)) if node.op == "-" else f
    if isinstance(node, Binary):
        op = binops[node.op]
        fl, fr = _compile(node.left, vectorized), _compile(node.right, vectorized)
        return lambda x: op(fl(x), fr(x))
    if isinstance(node, Call):
        fn = funcs[node.func]
        fa = _compile(node.arg, vectorized)
        return lambda x: fn(fa(x))
    if isinstance(node, Piecewise):
        conds = [(_CMP[c.op], _compile(c.left, vectorized), _compile(c.right, vectorized))
                 for c, _ in node.branches]
        values = [_compile(v, vectorized) for _, v in node.branches]
        other = _compile(node.otherwise, vectorized)
        if vectorized:
            def piecewise(x):
                x = np.asarray(x, dtype=np.float64)
                masks = [np.broadcast_to(cmp(fl(x), fr(x)), x.shape)
                         for cmp, fl, fr in conds]
                choices = [np.broadcast_to(v(x), x.shape) for v in values]
                return np.select(masks, choices, np.broadcast_to(other(x), x.shape))
            return piecewise

        def piecewise(x):
            for (cmp, fl, fr), v in zip(conds, values):
                if cmp(fl(x), fr(x)):
                    return v(x)
            return other(x)
        return piecewise
    raise TypeError(f"not an expression node: {node!r}")


def render(node: Node) -> str:
    """Text that parses back to an equivalent tree (fully parenthesized)."""
    if isinstance(node, Num):
        return repr(node.value) if node.value >= 0 else f"(-{repr(-node.value)})"
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Unary):
        return f"({node.op}{render(node.operand)})"
    if isinstance(node, Binary):
        return f"({render(node.left)} {node.op} {render(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({render(node.arg)})"
    if isinstance(node, Piecewise):
        parts = [f"{render(c.left)} {c.op} {render(c.right)} -> {render(v)}"
                 for c, v in node.branches]
        parts.append(f"else -> {render(node.otherwise)}")
        return "piecewise(" + ", ".join(parts) + ")"
    raise TypeError(f"not an expression node: {node!r}")


class Expression:
    """Parsed expression; call it with a float or an array."""

    __slots__ = ("tree", "source", "_scalar", "_vector")

    def __init__(self, tree: Node, source: str | None = None):
        self.tree = tree
        self.source = source if source is not None else render(tree)
        self._scalar = _compile(tree, vectorized=False)
        self._vector = _compile(tree, vectorized=True)

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            with np.errstate(all="ignore"):
                out = self._vector(x.astype(np.float64, copy=False))
            return np.broadcast_to(np.asarray(out, dtype=np.float64), x.shape).copy()
        try:
            return float(self._scalar(float(x)))
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise EvaluationError(f"{self.source!r} at x={x!r}: {exc}") from exc

    evaluate = __call__

    def render(self) -> str:
        return render(self.tree)

    def __repr__(self):
        return f"Expression({self.source!r})"
