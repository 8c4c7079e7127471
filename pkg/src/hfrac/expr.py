"""Tiny arithmetic expression language for right-hand sides f(t, x).

Grammar (recursive descent, standard precedence):

    expr    := term (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := "-" factor | power
    power   := atom ("^" factor)?          # right associative
    atom    := NUMBER | "t" | "x<K>" | "(" expr ")"

Exponents must fold to nonnegative integer constants (so `2^3^2` is fine
and equals 512, while `x1^x2` or `x1^-2` are rejected); this keeps powers of
negative bases well defined.  Function calls are deliberately absent.

A system definition file is plain text:

    kind=caputo            # or rl
    nu=0.5
    h=1
    a=0
    x0=0.1,0.2
    f1=-x1
    f2=-x2
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .solver import OperatorKind, SystemDef

__all__ = [
    "ExprSyntaxError",
    "ExprEvalError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Expr",
    "parse",
    "evaluate",
    "to_source",
    "uses_time",
    "parse_system_source",
    "load_system_file",
]

MAX_DEPTH = 64


class ExprSyntaxError(ValueError):
    """Parse failure; `offset` is the byte position in the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprEvalError(ArithmeticError):
    """Evaluation failure (division by zero)."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "t" or "x1".."xn"
    index: int | None  # 0-based component index, None for t


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Union[Num, Var, Neg, BinOp, Pow]

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, dim: int):
        self.src = src
        self.dim = dim
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)
        return self.advance()

    def parse(self) -> Expr:
        tree = self.expr(0)
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", pos)
        return tree

    def _deeper(self, depth: int) -> int:
        if depth >= MAX_DEPTH:
            raise ExprSyntaxError("expression nests too deeply", self.peek()[2])
        return depth + 1

    def expr(self, depth: int) -> Expr:
        depth = self._deeper(depth)
        node = self.term(depth)
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.term(depth))
            else:
                return node

    def term(self, depth: int) -> Expr:
        depth = self._deeper(depth)
        node = self.factor(depth)
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.factor(depth))
            else:
                return node

    def factor(self, depth: int) -> Expr:
        depth = self._deeper(depth)
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.factor(depth))
        return self.power(depth)

    def power(self, depth: int) -> Expr:
        depth = self._deeper(depth)
        base = self.atom(depth)
        kind, value, pos = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            exponent_expr = self.factor(depth)
            exponent = _fold_exponent(exponent_expr, pos)
            return Pow(base, exponent)
        return base

    def atom(self, depth: int) -> Expr:
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "ident":
            if value == "t":
                return Var("t", None)
            m = re.fullmatch(r"x(\d+)", value)
            if m is None:
                raise ExprSyntaxError(f"unknown variable {value!r}", pos)
            index = int(m.group(1))
            if not 1 <= index <= self.dim:
                raise ExprSyntaxError(
                    f"unknown variable {value!r} (dimension is {self.dim})", pos
                )
            return Var(value, index - 1)
        if kind == "op" and value == "(":
            node = self.expr(depth)
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"expected a value, got {value or 'end of input'!r}", pos)


def _fold_exponent(e: Expr, pos: int) -> int:
    """Reduce an exponent subtree to a nonnegative integer constant."""
    if isinstance(e, Num):
        value = e.value
    elif isinstance(e, Pow):
        value = float(_fold_exponent(e.base, pos)) ** e.exponent
    elif isinstance(e, Neg):
        value = -float(_fold_exponent(e.operand, pos))
    else:
        raise ExprSyntaxError("exponent must be an integer constant", pos)
    if value != int(value) or value < 0:
        raise ExprSyntaxError(
            f"exponent must be a nonnegative integer, got {value!r}", pos
        )
    return int(value)


def parse(src: str, dim: int) -> Expr:
    """Parse an expression over t, x1..x<dim>; raises :class:`ExprSyntaxError`."""
    if not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return _Parser(src, dim).parse()


def evaluate(e: Expr, t: float, x) -> float:
    """Evaluate over reals; division by zero raises :class:`ExprEvalError`."""
    x = np.asarray(x, dtype=float)
    return _eval(e, t, x)


def _eval(e: Expr, t: float, x: np.ndarray) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return t if e.index is None else float(x[e.index])
    if isinstance(e, Neg):
        return -_eval(e.operand, t, x)
    if isinstance(e, Pow):
        return _eval(e.base, t, x) ** e.exponent
    if isinstance(e, BinOp):
        left = _eval(e.left, t, x)
        right = _eval(e.right, t, x)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        denom = right
        if denom == 0.0:
            raise ExprEvalError("division by zero")
        return left / denom
    raise TypeError(f"not an expression node: {e!r}")


def to_source(e: Expr) -> str:
    """Print an expression; reparsing yields a structurally identical tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, Pow):
        return f"({to_source(e.base)}^{e.exponent})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    raise TypeError(f"not an expression node: {e!r}")


def uses_time(e: Expr) -> bool:
    if isinstance(e, Var):
        return e.index is None
    if isinstance(e, Neg):
        return uses_time(e.operand)
    if isinstance(e, Pow):
        return uses_time(e.base)
    if isinstance(e, BinOp):
        return uses_time(e.left) or uses_time(e.right)
    return False


def _compiled_rhs(exprs: tuple[Expr, ...]):
    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([_eval(e, t, np.asarray(x, dtype=float)) for e in exprs])

    return rhs


def parse_system_source(text: str) -> tuple[SystemDef, tuple[str, ...]]:
    """Build a system from definition text; returns it with the f_i sources."""
    headers: dict[str, str] = {}
    components: dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        m = re.fullmatch(r"f(\d+)", key)
        if m:
            components[int(m.group(1))] = value
        else:
            headers[key.lower()] = value

    for required in ("kind", "nu", "h", "a", "x0"):
        if required not in headers:
            raise ValueError(f"missing header line {required}=")
    kind_text = headers["kind"].lower()
    if kind_text == "caputo":
        kind = OperatorKind.CAPUTO
    elif kind_text == "rl":
        kind = OperatorKind.RIEMANN_LIOUVILLE
    else:
        raise ValueError(f"kind must be caputo or rl, got {headers['kind']!r}")
    x0 = np.array([float(v) for v in headers["x0"].split(",")])
    dim = len(x0)
    missing = [i for i in range(1, dim + 1) if i not in components]
    if missing:
        raise ValueError(f"missing component lines: {', '.join(f'f{i}' for i in missing)}")
    extra = sorted(set(components) - set(range(1, dim + 1)))
    if extra:
        raise ValueError(f"component lines beyond dimension {dim}: f{extra[0]}")

    sources = tuple(components[i] for i in range(1, dim + 1))
    exprs = tuple(parse(src, dim) for src in sources)
    system = SystemDef(
        dim=dim,
        kind=kind,
        nu=float(headers["nu"]),
        a=float(headers["a"]),
        h=float(headers["h"]),
        x0=x0,
        rhs=_compiled_rhs(exprs),
        time_dependent=any(uses_time(e) for e in exprs),
    )
    return system, sources


def load_system_file(path) -> tuple[SystemDef, tuple[str, ...]]:
    with open(path) as fh:
        return parse_system_source(fh.read())
