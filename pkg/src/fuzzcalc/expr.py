"""A small expression language over one fuzzy variable.

Grammar (lowest precedence first)::

    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := "exp" "(" expr ")" | "-" factor | base ("^" INT)?
    base   := "X" | NUMBER | "tri" "(" args ")" | "trap" "(" args ")"
            | "gauss" "(" args ")" | "(" expr ")"

``X`` is the fuzzy variable, ``tri``/``trap``/``gauss`` build fuzzy
constants, bare numbers are crisp constants.  ``*`` between a crisp
constant and anything else becomes scalar multiplication; between two
fuzzy operands it is the extension-principle product.  ``^`` desugars to
repeated multiplication (integer exponents >= 1 only), and a unary minus
in front of a number folds into the literal.

Every node parsed from text carries a :class:`Span` into the source;
spans never participate in structural equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .core import (
    FuzzyNumber,
    add as _f_add,
    crisp as _f_crisp,
    make_gaussian,
    make_triangular,
    make_trapezoidal,
    mul as _f_mul,
    scalar_mul as _f_scalar_mul,
    sub as _f_sub,
    GAUSS_ALPHA_MIN,
)
from .errors import FuzzyCalcError, InvalidParameterError

__all__ = [
    "Span",
    "ParseError",
    "Expr",
    "Var",
    "CrispConst",
    "FuzzyConst",
    "Add",
    "Sub",
    "Mul",
    "ScalarMul",
    "Exp",
    "Neg",
    "parse",
    "format",
    "fold_constants",
    "enumerate_nodes",
]


@dataclass(frozen=True)
class Span:
    """Half-open byte range [start, end) into the source text."""

    start: int
    end: int

    def excerpt(self, text: str) -> str:
        return text[self.start:self.end]


class ParseError(FuzzyCalcError, ValueError):
    """Lexical, syntactic or constructor error, located by a span."""

    def __init__(self, message: str, span: Span | None = None, text: str | None = None):
        self.span = span
        self.text = text
        if span is not None:
            message = f"{message} (at position {span.start})"
        super().__init__(message)

    def caret_diagram(self) -> str:
        """The source line with a caret run under the offending span."""
        if self.span is None or self.text is None:
            return str(self)
        width = max(self.span.end - self.span.start, 1)
        return "\n".join([
            self.text,
            " " * self.span.start + "^" * width,
        ])


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CrispConst:
    value: float
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FuzzyConst:
    value: FuzzyNumber
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ScalarMul:
    k: float
    operand: "Expr"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Exp:
    operand: "Expr"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Span | None = field(default=None, compare=False)


Expr = Union[Var, CrispConst, FuzzyConst, Add, Sub, Mul, ScalarMul, Exp, Neg]

_BINARY = (Add, Sub, Mul)
_UNARY = (ScalarMul, Exp, Neg)


def enumerate_nodes(e: Expr) -> list[tuple[int, Expr]]:
    """Preorder (id, node) pairs; ids are stable for a given tree shape."""
    out: list[tuple[int, Expr]] = []

    def walk(n: Expr) -> None:
        out.append((len(out), n))
        if isinstance(n, _BINARY):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, _UNARY):
            walk(n.operand)

    walk(e)
    return out


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_PUNCT = {"+", "-", "*", "^", "(", ")", ","}
_KEYWORDS = {"X", "exp", "tri", "trap", "gauss"}


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM | IDENT | one of _PUNCT | EOF
    text: str
    span: Span


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _PUNCT:
            toks.append(_Token(c, c, Span(i, i + 1)))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            toks.append(_Token("NUM", text[i:j], Span(i, j)))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Token("IDENT", text[i:j], Span(i, j)))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", Span(i, i + 1), text)
    toks.append(_Token("EOF", "", Span(n, n)))
    return toks


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, grid=None):
        self.text = text
        self.grid = grid
        self.toks = _tokenize(text)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    @property
    def cur(self) -> _Token:
        return self.toks[self.pos]

    def advance(self) -> _Token:
        t = self.cur
        self.pos += 1
        return t

    def expect(self, kind: str) -> _Token:
        if self.cur.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {self.cur.text or 'end of input'!r}",
                self.cur.span, self.text,
            )
        return self.advance()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> Expr:
        e = self.expr()
        if self.cur.kind != "EOF":
            raise ParseError(
                f"trailing input {self.cur.text!r}", self.cur.span, self.text
            )
        return e

    def expr(self) -> Expr:
        node = self.term()
        while self.cur.kind in ("+", "-"):
            op = self.advance()
            rhs = self.term()
            span = Span(_span_of(node).start, _span_of(rhs).end)
            cls = Add if op.kind == "+" else Sub
            node = cls(node, rhs, span=span)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.cur.kind == "*":
            self.advance()
            rhs = self.factor()
            span = Span(_span_of(node).start, _span_of(rhs).end)
            node = _make_product(node, rhs, span)
        return node

    def factor(self) -> Expr:
        t = self.cur
        if t.kind == "IDENT" and t.text == "exp":
            self.advance()
            self.expect("(")
            inner = self.expr()
            close = self.expect(")")
            return Exp(inner, span=Span(t.span.start, close.span.end))
        if t.kind == "-":
            self.advance()
            inner = self.factor()
            span = Span(t.span.start, _span_of(inner).end)
            if isinstance(inner, CrispConst):
                # fold the sign into the literal
                return CrispConst(-inner.value, span=span)
            return Neg(inner, span=span)
        return self.power()

    def power(self) -> Expr:
        base = self.base()
        if self.cur.kind != "^":
            return base
        caret = self.advance()
        t = self.cur
        if t.kind != "NUM" or not t.text.isdigit():
            raise ParseError(
                "exponent must be a positive integer literal",
                t.span if t.kind != "EOF" else caret.span, self.text,
            )
        self.advance()
        n = int(t.text)
        if n < 1:
            raise ParseError(
                "exponent must be >= 1", t.span, self.text
            )
        node = base
        span = Span(_span_of(base).start, t.span.end)
        for _ in range(n - 1):
            node = Mul(node, base, span=span)
        return node

    def base(self) -> Expr:
        t = self.cur
        if t.kind == "NUM":
            self.advance()
            return CrispConst(float(t.text), span=t.span)
        if t.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if t.kind == "IDENT":
            if t.text == "X":
                self.advance()
                return Var(span=t.span)
            if t.text in ("tri", "trap", "gauss"):
                return self.constructor(t)
            raise ParseError(
                f"unknown identifier {t.text!r}", t.span, self.text
            )
        raise ParseError(
            f"expected an operand, found {t.text or 'end of input'!r}",
            t.span, self.text,
        )

    def constructor(self, head: _Token) -> Expr:
        arity = {"tri": 3, "trap": 4, "gauss": 2}[head.text]
        self.advance()
        self.expect("(")
        args = [self.number_arg()]
        while self.cur.kind == ",":
            self.advance()
            args.append(self.number_arg())
        close = self.expect(")")
        span = Span(head.span.start, close.span.end)
        if len(args) != arity:
            raise ParseError(
                f"{head.text} takes {arity} arguments, got {len(args)}",
                span, self.text,
            )
        try:
            if head.text == "tri":
                value = make_triangular(*args, grid=self.grid)
            elif head.text == "trap":
                value = make_trapezoidal(*args, grid=self.grid)
            else:
                value = make_gaussian(*args, grid=self.grid)
        except InvalidParameterError as exc:
            raise ParseError(str(exc), span, self.text) from exc
        return FuzzyConst(value, span=span)

    def number_arg(self) -> float:
        sign = 1.0
        if self.cur.kind in ("+", "-"):
            sign = -1.0 if self.cur.kind == "-" else 1.0
            self.advance()
        t = self.expect("NUM")
        return sign * float(t.text)


def _span_of(node: Expr) -> Span:
    return node.span or Span(0, 0)


def _make_product(left: Expr, right: Expr, span: Span) -> Expr:
    """``*`` becomes ScalarMul whenever one side is a crisp constant."""
    if isinstance(left, CrispConst):
        return ScalarMul(left.value, right, span=span)
    if isinstance(right, CrispConst):
        return ScalarMul(right.value, left, span=span)
    return Mul(left, right, span=span)


def parse(text: str, grid=None) -> Expr:
    """Parse source text into an AST.

    ``grid`` fixes the alpha grid used for fuzzy constants; the package
    default is used when omitted.
    """
    return _Parser(text, grid=grid).parse()


# ---------------------------------------------------------------------------
# formatter
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_ATOM = 1, 2, 3, 4


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _fmt(node: Expr, min_prec: int) -> str:
    text, prec = _fmt_node(node)
    if prec < min_prec:
        return f"({text})"
    return text


def _fmt_node(node: Expr) -> tuple[str, int]:
    if isinstance(node, Var):
        return "X", _PREC_ATOM
    if isinstance(node, CrispConst):
        s = _fmt_float(node.value)
        return s, (_PREC_UNARY if node.value < 0 else _PREC_ATOM)
    if isinstance(node, FuzzyConst):
        return _fmt_fuzzy_const(node.value), _PREC_ATOM
    if isinstance(node, Add):
        return f"{_fmt(node.left, _PREC_ADD)} + {_fmt(node.right, _PREC_MUL)}", _PREC_ADD
    if isinstance(node, Sub):
        return f"{_fmt(node.left, _PREC_ADD)} - {_fmt(node.right, _PREC_MUL)}", _PREC_ADD
    if isinstance(node, Mul):
        return f"{_fmt(node.left, _PREC_MUL)}*{_fmt(node.right, _PREC_UNARY)}", _PREC_MUL
    if isinstance(node, ScalarMul):
        return f"{_fmt_float(node.k)}*{_fmt(node.operand, _PREC_UNARY)}", _PREC_MUL
    if isinstance(node, Neg):
        return f"-{_fmt(node.operand, _PREC_ATOM)}", _PREC_UNARY
    if isinstance(node, Exp):
        return f"exp({_fmt(node.operand, _PREC_ADD)})", _PREC_ATOM
    raise TypeError(f"not an expression node: {node!r}")


def _fmt_fuzzy_const(value: FuzzyNumber) -> str:
    tag = value.tag
    if not tag:
        raise ValueError(
            "fuzzy constant without a parametric tag has no source form"
        )
    kind = tag.get("kind")
    if kind == "triangular":
        args = (tag["left"], tag["peak"], tag["right"])
        return "tri(" + ", ".join(_fmt_float(v) for v in args) + ")"
    if kind == "trapezoidal":
        args = (tag["a"], tag["b"], tag["c"], tag["d"])
        return "trap(" + ", ".join(_fmt_float(v) for v in args) + ")"
    if kind == "gaussian":
        if abs(tag.get("alpha_min", GAUSS_ALPHA_MIN) - GAUSS_ALPHA_MIN) > 0:
            raise ValueError(
                "gaussian constant with non-default alpha_min has no source form"
            )
        return f"gauss({_fmt_float(tag['mu'])}, {_fmt_float(tag['sigma'])})"
    raise ValueError(f"fuzzy constant of kind {kind!r} has no source form")


def format(node: Expr) -> str:
    """Render an AST back to parseable text.

    ``parse(format(e))`` is structurally equal to ``e`` whenever every
    fuzzy constant carries a parametric tag (which is always the case
    for parsed expressions).
    """
    return _fmt(node, 0)


# ---------------------------------------------------------------------------
# constant folding
# ---------------------------------------------------------------------------


def _is_const(node: Expr) -> bool:
    return isinstance(node, (CrispConst, FuzzyConst))


def _as_fuzzy(node: Expr, grid=None) -> FuzzyNumber:
    if isinstance(node, FuzzyConst):
        return node.value
    return _f_crisp(node.value, grid=grid)


def fold_constants(e: Expr) -> Expr:
    """Collapse variable-free subtrees and trivial identities.

    Crisp-only subtrees become :class:`CrispConst`; mixed constant
    subtrees are evaluated with the level-wise arithmetic and become
    :class:`FuzzyConst`.  Multiplying by crisp 1 and adding or
    subtracting crisp 0 are dropped.  Evaluation semantics are
    unchanged.
    """
    if isinstance(e, (Var, CrispConst, FuzzyConst)):
        return e

    if isinstance(e, (Add, Sub)):
        left = fold_constants(e.left)
        right = fold_constants(e.right)
        if isinstance(left, CrispConst) and isinstance(right, CrispConst):
            v = left.value + right.value if isinstance(e, Add) else left.value - right.value
            return CrispConst(v, span=e.span)
        if _is_const(left) and _is_const(right):
            op = _f_add if isinstance(e, Add) else _f_sub
            return FuzzyConst(op(_as_fuzzy(left), _as_fuzzy(right)), span=e.span)
        if isinstance(right, CrispConst) and right.value == 0.0:
            return left
        if isinstance(e, Add) and isinstance(left, CrispConst) and left.value == 0.0:
            return right
        return type(e)(left, right, span=e.span)

    if isinstance(e, Mul):
        left = fold_constants(e.left)
        right = fold_constants(e.right)
        if isinstance(left, CrispConst) and isinstance(right, CrispConst):
            return CrispConst(left.value * right.value, span=e.span)
        if _is_const(left) and _is_const(right):
            return FuzzyConst(_f_mul(_as_fuzzy(left), _as_fuzzy(right)), span=e.span)
        if isinstance(left, CrispConst):
            return fold_constants(ScalarMul(left.value, right, span=e.span))
        if isinstance(right, CrispConst):
            return fold_constants(ScalarMul(right.value, left, span=e.span))
        return Mul(left, right, span=e.span)

    if isinstance(e, ScalarMul):
        inner = fold_constants(e.operand)
        if isinstance(inner, CrispConst):
            return CrispConst(e.k * inner.value, span=e.span)
        if isinstance(inner, FuzzyConst):
            return FuzzyConst(_f_scalar_mul(e.k, inner.value), span=e.span)
        if e.k == 1.0:
            return inner
        return ScalarMul(e.k, inner, span=e.span)

    if isinstance(e, Neg):
        inner = fold_constants(e.operand)
        if isinstance(inner, CrispConst):
            return CrispConst(-inner.value, span=e.span)
        if isinstance(inner, FuzzyConst):
            return FuzzyConst(_f_scalar_mul(-1.0, inner.value), span=e.span)
        return Neg(inner, span=e.span)

    if isinstance(e, Exp):
        inner = fold_constants(e.operand)
        if isinstance(inner, (CrispConst, FuzzyConst)):
            with np.errstate(over="ignore"):
                if isinstance(inner, CrispConst):
                    v = float(np.exp(inner.value))
                    if np.isfinite(v):
                        return CrispConst(v, span=e.span)
                else:
                    lo = np.exp(inner.value.lo)
                    hi = np.exp(inner.value.hi)
                    if np.all(np.isfinite(hi)):
                        return FuzzyConst(
                            FuzzyNumber(inner.value.grid, lo, hi), span=e.span
                        )
            # overflow: leave the node alone so evaluation still reports it
            return Exp(inner, span=e.span)
        return Exp(inner, span=e.span)

    raise TypeError(f"not an expression node: {e!r}")
