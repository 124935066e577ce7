"""A small expression language for scalar fields on the tangent bundle.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | "+" unary | power ;
    power   = atom [ ("^" | "**") unary ] ;          (* right associative *)
    atom    = number | variable | call | "(" expr ")" ;
    call    = func "(" expr ")"
            | "dot" "(" block "," block ")"
            | "norm2" "(" block ")" ;
    func    = "sqrt" | "exp" | "ln" | "abs" ;
    block   = "x" | "y" ;
    variable= ("x" | "y") digits ;                   (* 1-based index *)

The exponent of ``^`` must reduce to a numeric literal.  ``dot(x, y)`` is
``sum_i x^i y^i`` and ``norm2(y)`` is ``dot(y, y)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import jet as _jet
from .coords import Chart, ScalarField, TangentSample
from .errors import DomainError, NonHomogeneousError, NonPositiveValue, SpraylabError

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "ArityError",
    "UnknownIdentifier",
    "IndexOutOfRange",
    "Num",
    "Var",
    "Unary",
    "Binary",
    "Dot",
    "Norm2",
    "parse",
    "to_source",
    "compile_expr",
    "field_from_expression",
    "homogeneity_fit",
    "homogeneity_degree",
]


class ExprError(SpraylabError, ValueError):
    """Base class for expression errors; ``offset`` is a UTF-8 byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.expected = expected
        if expected:
            message = f"{message}; expected {' or '.join(expected)}"
        super().__init__(message, offset)


class ArityError(ExprError):
    pass


class UnknownIdentifier(ExprError):
    pass


class IndexOutOfRange(ExprError):
    pass


# --- AST ------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    block: str  # "x" or "y"
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str  # neg, sqrt, exp, ln, abs
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Dot:
    a: str
    b: str


@dataclass(frozen=True)
class Norm2:
    a: str


Node = Union[Num, Var, Unary, Binary, Dot, Norm2]

FUNCTIONS = {"sqrt", "exp", "ln", "abs"}

# --- tokenizer ------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, name, op, end
    text: str
    pos: int  # character index


def _tokenize(src: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos))
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            out.append(_Tok(kind, "^" if text == "**" else text, pos))
        pos = m.end()
    out.append(_Tok("end", "", len(src)))
    return out


def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


# --- parser ---------------------------------------------------------------

_BINARY_BP = {"+": 10, "-": 10, "*": 20, "/": 20}
_UNARY_BP = 30
_POW_BP = 40


class _Parser:
    def __init__(self, src: str, dim: int):
        self.src = src
        self.dim = dim
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def offset(self, tok: _Tok) -> int:
        return _byte_offset(self.src, tok.pos)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.kind != "op" or t.text != text:
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise ExprSyntaxError(f"found {found}", self.offset(t), (repr(text),))
        return self.advance()

    def parse(self) -> Node:
        node = self.expression(0)
        t = self.peek()
        if t.kind != "end":
            raise ExprSyntaxError(f"unexpected {t.text!r}", self.offset(t), ("operator", "end of input"))
        return node

    def expression(self, rbp: int) -> Node:
        left = self.prefix()
        while True:
            t = self.peek()
            if t.kind != "op":
                break
            if t.text == "^":
                bp = _POW_BP
            else:
                bp = _BINARY_BP.get(t.text)
                if bp is None:
                    break
            if bp <= rbp:
                break
            self.advance()
            if t.text == "^":
                # right operand binds at unary level: allows x^-2, keeps right associativity
                exponent = self.expression(_UNARY_BP - 1)
                left = Binary("^", left, Num(_literal_value(exponent, self.offset(t) + 1)))
            else:
                left = Binary(t.text, left, self.expression(bp))
        return left

    def prefix(self) -> Node:
        t = self.advance()
        if t.kind == "num":
            return Num(float(t.text))
        if t.kind == "op" and t.text in "-+":
            operand = self.expression(_UNARY_BP)
            return Unary("neg", operand) if t.text == "-" else operand
        if t.kind == "op" and t.text == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if t.kind == "name":
            return self.name(t)
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(
            f"found {found}", self.offset(t), ("number", "variable", "function", "'('")
        )

    def block(self) -> str:
        t = self.advance()
        if t.kind != "name" or t.text not in ("x", "y"):
            raise ExprSyntaxError(f"found {t.text!r}", self.offset(t), ("'x'", "'y'"))
        return t.text

    def name(self, t: _Tok) -> Node:
        text = t.text
        m = re.fullmatch(r"([xy])(\d+)", text)
        if m:
            idx = int(m.group(2))
            if not 1 <= idx <= self.dim:
                raise IndexOutOfRange(
                    f"variable {text} outside dimension {self.dim}", self.offset(t)
                )
            return Var(m.group(1), idx)
        if text in FUNCTIONS or text in ("dot", "norm2"):
            self.expect("(")
            if text == "dot":
                a = self.block()
                if self.peek().kind == "op" and self.peek().text == ")":
                    raise ArityError("dot takes two arguments", self.offset(self.peek()))
                self.expect(",")
                b = self.block()
                node: Node = Dot(a, b)
            elif text == "norm2":
                node = Norm2(self.block())
            else:
                node = Unary(text, self.expression(0))
            if self.peek().kind == "op" and self.peek().text == ",":
                raise ArityError(f"too many arguments to {text}", self.offset(self.peek()))
            self.expect(")")
            return node
        raise UnknownIdentifier(f"unknown identifier {text!r}", self.offset(t))


def _literal_value(node: Node, offset: int) -> float:
    """Fold a literal-only exponent to a number."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Unary) and node.op == "neg":
        return -_literal_value(node.arg, offset)
    if isinstance(node, Binary):
        a = _literal_value(node.left, offset)
        b = _literal_value(node.right, offset)
        return {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b else math.nan, "^": a**b}[node.op]
    raise ExprSyntaxError("exponent must be a numeric literal", offset, ("number",))


def parse(src: str, dim: int) -> Node:
    """Parse ``src`` into an AST for a chart of dimension ``dim``."""
    if not src.strip():
        raise ExprSyntaxError("empty expression", 0, ("expression",))
    return _Parser(src, dim).parse()


# --- printing -------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def to_source(node: Node) -> str:
    """Render an AST as text that parses back to an equal AST."""
    return _show(node, 0)


def _show(node: Node, ctx: int) -> str:
    if isinstance(node, Num):
        s = repr(node.value)
        return f"({s})" if node.value < 0 or s.startswith("-") else s
    if isinstance(node, Var):
        return f"{node.block}{node.index}"
    if isinstance(node, Dot):
        return f"dot({node.a},{node.b})"
    if isinstance(node, Norm2):
        return f"norm2({node.a})"
    if isinstance(node, Unary):
        if node.op == "neg":
            s = "-" + _show(node.arg, 3)
            return f"({s})" if ctx > 3 else s
        return f"{node.op}({_show(node.arg, 0)})"
    p = _PREC[node.op]
    if node.op == "^":
        s = f"{_show(node.left, p + 1)}^{_show(node.right, 0)}"
    else:
        # left associative: right child needs strictly higher precedence
        s = f"{_show(node.left, p)}{node.op}{_show(node.right, p + 1)}"
    return f"({s})" if p < ctx else s


# --- compilation ----------------------------------------------------------

_UNARY_FN = {"sqrt": _jet.sqrt, "exp": _jet.exp, "ln": _jet.log, "abs": _jet.fabs}


def _build(node: Node, n: int) -> Callable[[list], object]:
    if isinstance(node, Num):
        v = node.value
        return lambda z: v
    if isinstance(node, Var):
        k = node.index - 1 + (n if node.block == "y" else 0)
        return lambda z: z[k]
    if isinstance(node, Dot):
        oa = 0 if node.a == "x" else n
        ob = 0 if node.b == "x" else n

        def dot(z):
            s = z[oa] * z[ob]
            for i in range(1, n):
                s = s + z[oa + i] * z[ob + i]
            return s

        return dot
    if isinstance(node, Norm2):
        return _build(Dot(node.a, node.a), n)
    if isinstance(node, Unary):
        arg = _build(node.arg, n)
        if node.op == "neg":
            return lambda z: -arg(z)
        fn = _UNARY_FN[node.op]
        return lambda z: fn(arg(z))
    left = _build(node.left, n)
    right = _build(node.right, n)
    if node.op == "+":
        return lambda z: left(z) + right(z)
    if node.op == "-":
        return lambda z: left(z) - right(z)
    if node.op == "*":
        return lambda z: left(z) * right(z)
    if node.op == "/":

        def div(z):
            b = right(z)
            if not isinstance(b, _jet.Jet):
                if b == 0:
                    raise DomainError("division by zero")
                b = _jet.Jet.const(float(b), len(z), z[0].order)
            return left(z) * b.reciprocal()

        return div
    e = node.right.value

    def pw(z):
        b = left(z)
        if not isinstance(b, _jet.Jet):
            b = _jet.Jet.const(float(b), len(z), z[0].order)
        return _jet.power(b, e)

    return pw


def _check_indices(node: Node, dim: int) -> None:
    if isinstance(node, Var) and node.index > dim:
        raise IndexOutOfRange(f"variable {node.block}{node.index} outside dimension {dim}")
    for child in (getattr(node, "arg", None), getattr(node, "left", None), getattr(node, "right", None)):
        if child is not None:
            _check_indices(child, dim)


def compile_expr(ast: Node, chart: Chart, name: str | None = None) -> ScalarField:
    """Turn an AST into a :class:`ScalarField` evaluable to any jet order."""
    _check_indices(ast, chart.dim)
    evaluate = _build(ast, chart.dim)

    def jet_fn(p: TangentSample, order: int):
        return evaluate(_jet.variables(p.z, order))

    return ScalarField(chart, jet_fn, None, name or to_source(ast))


def field_from_expression(src: str, chart: Chart) -> ScalarField:
    return compile_expr(parse(src, chart.dim), chart, src)


# --- homogeneity ----------------------------------------------------------

SCALES = (0.5, 2.0, 4.0)


def homogeneity_fit(f: ScalarField, p: TangentSample) -> tuple[float, float]:
    """Degree estimates from ``f(x, lam*y) / f(x, y)`` for lam in 0.5, 2, 4.

    Returns the mean estimate and the spread (max - min) of the three.
    """
    f0 = f.value(p)
    if f0 <= 0:
        raise NonPositiveValue(f"{f.name} is {f0!r} at {p!r}")
    estimates = []
    for lam in SCALES:
        fl = f.value(p.scaled(lam))
        if fl <= 0:
            raise NonPositiveValue(f"{f.name} is {fl!r} at y scaled by {lam}")
        estimates.append(math.log(fl / f0) / math.log(lam))
    est = np.array(estimates)
    return float(est.mean()), float(est.max() - est.min())


def homogeneity_degree(f: ScalarField, p: TangentSample, tol: float = 1e-9) -> float:
    """Positive-homogeneity degree of ``f`` along the fiber at ``p``.

    Raises :class:`NonHomogeneousError` when the scale estimates spread by
    more than ``tol``.
    """
    degree, spread = homogeneity_fit(f, p)
    if spread > tol:
        raise NonHomogeneousError(
            f"{f.name} is not homogeneous at {p!r}: estimates spread by {spread:.3g}"
        )
    return degree
