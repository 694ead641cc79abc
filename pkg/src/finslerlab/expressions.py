"""A tiny expression language for metric profiles phi(r, s).

Grammar (no implicit multiplication, '^' binds tighter than unary minus
and is right-associative):

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'r' | 's' | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
    IDENT  := 'sqrt' | 'exp' | 'ln_abs' | 'arctanh_re' | 'abs' | 'pow'

Expressions evaluate directly over the jet algebra, so one pass produces a
value together with all stored partial derivatives.  The builtin registry
provides the named metrics used throughout: two of them (example1,
example2) are defined by their rational log-derivative pair rather than a
closed form, because the closed forms involve arctanh branch choices that
do not survive real evaluation; the log-derivatives are branch-free.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .jets import (
    DEFAULT_ORDER_R,
    DEFAULT_ORDER_S,
    DomainError,
    Jet,
    jet_apply,
    jet_constant,
    jet_seed_r,
    jet_seed_s,
)

__all__ = [
    "ParseError",
    "UnknownBuiltin",
    "MissingParameter",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Expr",
    "PhiExpr",
    "parse",
    "parse_expr",
    "print_expr",
    "eval_jet",
    "eval_expr",
    "eval_scalar",
    "expr_variables",
    "BuiltinMetric",
    "builtin",
    "builtin_names",
]


class ParseError(ValueError):
    """Syntax error with a character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownBuiltin(KeyError):
    pass


class MissingParameter(ValueError):
    pass


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # 'r' or 's'


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


Expr = Num | Var | Neg | BinOp | Call
PhiExpr = Expr

_FUNCTIONS = {"sqrt": 1, "exp": 1, "ln_abs": 1, "arctanh_re": 1, "abs": 1, "pow": 2}

_NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def parse(self) -> Expr:
        e = self.expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise ParseError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        e = self.atom()
        if self.peek() == "^":
            self.pos += 1
            e = BinOp("^", e, self.unary())
        return e

    def atom(self) -> Expr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if ch.isdigit() or ch == ".":
            mo = _NUMBER_RE.match(self.text, self.pos)
            if not mo:
                raise ParseError("malformed number", self.pos)
            self.pos = mo.end()
            return Num(float(mo.group()))
        if ch.isalpha() or ch == "_":
            start = self.pos
            mo = _IDENT_RE.match(self.text, self.pos)
            name = mo.group()
            self.pos = mo.end()
            if name in ("r", "s"):
                return Var(name)
            if name not in _FUNCTIONS:
                raise ParseError(f"unknown identifier {name!r}", start)
            self.expect("(")
            args = [self.expr()]
            while self.peek() == ",":
                self.pos += 1
                args.append(self.expr())
            self.expect(")")
            if len(args) != _FUNCTIONS[name]:
                raise ParseError(
                    f"{name} takes {_FUNCTIONS[name]} argument(s), got {len(args)}",
                    start,
                )
            return Call(name, tuple(args))
        raise ParseError("expected a number, variable, function or '('", self.pos)


def parse(text: str) -> Expr:
    """Parse an expression; raises ParseError with a position on bad input."""
    if not isinstance(text, str):
        raise ParseError("input is not a string", 0)
    return _Parser(text).parse()


parse_expr = parse


# -- printing -----------------------------------------------------------------


def _prec(e: Expr) -> int:
    if isinstance(e, (Num, Var, Call)):
        return 5
    if isinstance(e, Neg):
        return 3
    return 4 if e.op == "^" else (2 if e.op in "*/" else 1)


def print_expr(e: Expr) -> str:
    """Render an AST; reparsing the output reproduces the AST exactly."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = print_expr(e.arg)
        if _prec(e.arg) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, BinOp):
        lhs, rhs = print_expr(e.left), print_expr(e.right)
        if e.op == "^":
            if _prec(e.left) <= 4:
                lhs = f"({lhs})"
            if _prec(e.right) < 3:
                rhs = f"({rhs})"
            return f"{lhs}^{rhs}"
        p = _prec(e)
        if _prec(e.left) < p:
            lhs = f"({lhs})"
        if _prec(e.right) <= p:
            rhs = f"({rhs})"
        return f"{lhs}{e.op}{rhs}"
    raise TypeError(f"not an expression node: {e!r}")


def expr_variables(e: Expr) -> set:
    """The variable names appearing in an expression."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return expr_variables(e.arg)
    if isinstance(e, BinOp):
        return expr_variables(e.left) | expr_variables(e.right)
    if isinstance(e, Call):
        out = set()
        for a in e.args:
            out |= expr_variables(a)
        return out
    return set()


# -- evaluation over jets -------------------------------------------------------


def _is_constant_jet(j: Jet) -> bool:
    return np.count_nonzero(j.c) in (0, 1) and (j.c.flat[0] != 0 or not j.c.any())


def eval_expr(e: Expr, rj: Jet, sj: Jet) -> Jet:
    """Evaluate over an arbitrary pair of coordinate jets (same shape)."""
    if isinstance(e, Num):
        return jet_constant(e.value, rj.r0, rj.s0, rj.shape[0] - 1, rj.shape[1] - 1)
    if isinstance(e, Var):
        return rj if e.name == "r" else sj
    if isinstance(e, Neg):
        return -eval_expr(e.arg, rj, sj)
    if isinstance(e, BinOp):
        a = eval_expr(e.left, rj, sj)
        if e.op == "^":
            b = eval_expr(e.right, rj, sj)
            if _is_constant_jet(b):
                return jet_apply("pow", a, exponent=b.value)
            if a.value <= 0.0:
                raise DomainError("non-constant exponent needs a positive base")
            return jet_apply("exp", b * jet_apply("ln_abs", a))
        b = eval_expr(e.right, rj, sj)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return a / b
    if isinstance(e, Call):
        if e.fn == "pow":
            base = eval_expr(e.args[0], rj, sj)
            expo = eval_expr(e.args[1], rj, sj)
            if not _is_constant_jet(expo):
                raise DomainError("pow exponent must be constant")
            return jet_apply("pow", base, exponent=expo.value)
        return jet_apply(e.fn, eval_expr(e.args[0], rj, sj))
    raise TypeError(f"not an expression node: {e!r}")


def eval_jet(e: Expr, r0: float, s0: float,
             order_r: int = DEFAULT_ORDER_R, order_s: int = DEFAULT_ORDER_S) -> Jet:
    """Evaluate an expression to a jet at (r0, s0)."""
    rj = jet_seed_r(r0, s0, order_r, order_s)
    sj = jet_seed_s(r0, s0, order_r, order_s)
    return eval_expr(e, rj, sj)


def _pow_scalar(base: float, p: float) -> float:
    k = round(p)
    if abs(p - k) < 1e-12:
        if base == 0.0 and k < 0:
            raise DomainError("zero base with negative integer exponent")
        return base ** k
    if base < 0.0:
        raise DomainError("fractional power of a negative base")
    if base == 0.0 and p < 0.0:
        raise DomainError("zero base with negative exponent")
    return base ** p


def eval_scalar(e: Expr, r: float, s: float) -> float:
    """Value-only evaluation with plain floats.

    Matches eval_jet's constant term while skipping all derivative
    bookkeeping; used on hot paths (quadrature, integration right-hand
    sides, grid sweeps that only need values).
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return r if e.name == "r" else s
    if isinstance(e, Neg):
        return -eval_scalar(e.arg, r, s)
    if isinstance(e, BinOp):
        a = eval_scalar(e.left, r, s)
        b = eval_scalar(e.right, r, s)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0.0:
                raise DomainError("division by zero")
            return a / b
        return _pow_scalar(a, b)
    if isinstance(e, Call):
        if e.fn == "pow":
            return _pow_scalar(eval_scalar(e.args[0], r, s),
                               eval_scalar(e.args[1], r, s))
        x = eval_scalar(e.args[0], r, s)
        if e.fn == "sqrt":
            if x <= 0.0:
                raise DomainError(f"sqrt of non-positive value {x}")
            return math.sqrt(x)
        if e.fn == "exp":
            return math.exp(x)
        if e.fn == "ln_abs":
            if x == 0.0:
                raise DomainError("ln_abs of zero")
            return math.log(abs(x))
        if e.fn == "arctanh_re":
            if x == 1.0 or x == -1.0:
                raise DomainError("arctanh_re at a branch point")
            return 0.5 * (math.log(abs(1.0 + x)) - math.log(abs(1.0 - x)))
        return abs(x)
    raise TypeError(f"not an expression node: {e!r}")


# -- builtin metric registry ----------------------------------------------------


@dataclass(frozen=True)
class BuiltinMetric:
    """A named metric profile.

    Closed-form entries carry a phi(r, s) expression.  Log-derivative
    entries carry the rational pair (phi_s/phi, phi_r/phi) with an anchor
    value phi(anchor_r, 0); the anchor fixes the immaterial positive scale
    of phi.  (tau_lo, tau_hi) bounds the cone s/r on which the definition
    stays finite; closed-form metrics valid on all of |s| < r use (-1, 1).
    """

    name: str
    kind: str  # 'closed_form' or 'log_derivative'
    expr: Expr | None = None
    ell: Expr | None = None  # phi_s / phi
    em: Expr | None = None  # phi_r / phi
    anchor_r: float = 1.0
    anchor_phi: float = 1.0
    tau_lo: float = -1.0
    tau_hi: float = 1.0
    cross_check: Expr | None = None
    params: dict = field(default_factory=dict)
    provenance: str = ""


_W = "sqrt(r^2 - s^2)"

# Example 1 log-derivative pair (family coefficients c1 = c3 = 1/r^2,
# c = 1/(2*sqrt(2))).  phi degenerates where the shared denominator
# vanishes: at s = r/sqrt(5) and s = -r/sqrt(2).
_EX1_ELL = f"(3*s + {_W}) / (-r^2 + 3*s^2 + s*{_W})"
_EX1_M = f"-r / (-r^2 + 3*s^2 + s*{_W})"

# An explicit integral of the Example 1 pair, usable as a cross-check.
# The third arctanh coefficient here is sqrt(5)/10, scaling its argument
# to (s - sqrt(5)*r)/(2w); with that choice (and real ln_abs branches)
# the log-derivatives of this expression match the rational pair on the
# whole cone, which we verify numerically in the tests.
_EX1_CLOSED = (
    f"abs(5*s^2 - r^2)^(1/3) * abs(2*s^2 - r^2)^(1/6) * exp("
    f"(1/3)*arctanh_re((s + sqrt(5)*r) / (2*{_W}))"
    f" - (1/6)*arctanh_re((s + sqrt(2)*r) / {_W})"
    f" + (1/3)*arctanh_re((s - sqrt(5)*r) / (2*{_W}))"
    f" - (1/6)*arctanh_re((s - sqrt(2)*r) / {_W}))"
)

# Example 2 pair (c1 = 0, c3 = 1/r^2, c = 1/2); degenerate at
# s = r*sqrt((5-sqrt(5))/10) and s = -r*sqrt((5+sqrt(5))/10).
_EX2_ELL = f"(2*s + {_W}) / (-r^2 + 2*s^2 + s*{_W})"
_EX2_M = f"(-2*s^2 - s*{_W}) / (r*(-r^2 + 2*s^2 + s*{_W}))"

_ZHOU_TEMPLATE = "(1/r^{n})*sqrt(r^2 - s^2)*exp(2*s/sqrt(r^2 - s^2))"


def _ex1_cone() -> tuple[float, float]:
    return (-1.0 / math.sqrt(2.0), 1.0 / math.sqrt(5.0))


def _ex2_cone() -> tuple[float, float]:
    return (-math.sqrt((5 + math.sqrt(5)) / 10), math.sqrt((5 - math.sqrt(5)) / 10))


def builtin_names() -> tuple[str, ...]:
    return ("euclidean", "riemann_quadratic", "example1", "example2",
            "zhou2d_r5", "zhou2d_r6")


def _as_radial_expr(value, pname: str) -> Expr:
    if isinstance(value, (int, float)):
        return Num(float(value))
    e = value if not isinstance(value, str) else parse(value)
    bad = expr_variables(e) - {"r"}
    if bad:
        raise MissingParameter(
            f"parameter {pname} must be a function of r only, found {sorted(bad)}"
        )
    return e


def builtin(name: str, params: dict | None = None) -> BuiltinMetric:
    """Look up a builtin metric; params only apply to riemann_quadratic."""
    params = dict(params or {})
    if name == "riemann_quadratic":
        try:
            f1 = _as_radial_expr(params.pop("f1"), "f1")
            f2 = _as_radial_expr(params.pop("f2"), "f2")
        except KeyError as missing:
            raise MissingParameter(
                f"riemann_quadratic requires parameter {missing.args[0]}"
            ) from None
        if params:
            raise MissingParameter(f"unknown parameters {sorted(params)}")
        expr = Call("sqrt", (BinOp("+", f1, BinOp("*", f2, BinOp("^", Var("s"), Num(2.0)))),))
        return BuiltinMetric(name=name, kind="closed_form", expr=expr,
                             params={"f1": print_expr(f1), "f2": print_expr(f2)},
                             provenance="Riemannian branch sqrt(f1(r) + f2(r)*s^2)")
    if params:
        raise MissingParameter(f"{name} takes no parameters, got {sorted(params)}")
    if name == "euclidean":
        return BuiltinMetric(name=name, kind="closed_form", expr=Num(1.0),
                             provenance="flat metric, phi = 1")
    if name == "zhou2d_r5":
        return BuiltinMetric(name=name, kind="closed_form",
                             expr=parse(_ZHOU_TEMPLATE.format(n=5)),
                             provenance="surface Landsberg candidate with 1/r^5 prefactor")
    if name == "zhou2d_r6":
        return BuiltinMetric(name=name, kind="closed_form",
                             expr=parse(_ZHOU_TEMPLATE.format(n=6)),
                             provenance="surface Landsberg metric with corrected 1/r^6 prefactor")
    if name == "example1":
        lo, hi = _ex1_cone()
        return BuiltinMetric(name=name, kind="log_derivative",
                             ell=parse(_EX1_ELL), em=parse(_EX1_M),
                             anchor_r=1.0, anchor_phi=1.0,
                             tau_lo=lo, tau_hi=hi,
                             cross_check=parse(_EX1_CLOSED),
                             provenance="Landsberg family with c1 = c3 = 1/r^2, c = 1/(2*sqrt(2))")
    if name == "example2":
        lo, hi = _ex2_cone()
        return BuiltinMetric(name=name, kind="log_derivative",
                             ell=parse(_EX2_ELL), em=parse(_EX2_M),
                             anchor_r=1.0, anchor_phi=1.0,
                             tau_lo=lo, tau_hi=hi,
                             provenance="Landsberg family with c1 = 0, c3 = 1/r^2, c = 1/2")
    raise UnknownBuiltin(name)
