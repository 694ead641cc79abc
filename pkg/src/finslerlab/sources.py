"""Metric sources: anything that can produce a phi-jet at a point.

ExprSource evaluates a closed-form phi(r, s) expression.  LogDerivSource
carries the pair (ell, m) = (phi_s/phi, phi_r/phi) plus one anchor value
phi(r0, 0).  Every stored derivative of ln(phi) is a jet coefficient of
ell or m, so it is exact to roundoff; only the single constant
ln(phi(r, s)) itself needs quadrature (radially along s = 0, then up the
s-column).  Applying exp to the assembled log-jet gives the phi-jet.
Downstream residuals are positively homogeneous in phi, so quadrature
error enters them only as a constant rescale of order the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expressions import BuiltinMetric, Expr, eval_jet, eval_scalar, parse, print_expr
from .jets import DEFAULT_ORDER_R, DEFAULT_ORDER_S, DomainError, Jet, jet_apply

__all__ = [
    "IntegrationFailure",
    "adaptive_simpson",
    "as_source",
    "ExprSource",
    "LogDerivSource",
    "source_for",
]


class IntegrationFailure(ArithmeticError):
    pass


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10,
                     max_depth: int = 40) -> float:
    """Adaptive Simpson quadrature with Richardson end correction."""
    if a == b:
        return 0.0

    def recurse(a, fa, m, fm, b, fb, whole, tol, depth):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        if depth >= max_depth:
            raise IntegrationFailure(
                f"no convergence on [{a}, {b}] after depth {depth}")
        return (recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1))

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return recurse(a, fa, 0.5 * (a + b), fm, b, fb, whole, tol, 0)


def _check_point(r: float, s: float, tau_lo: float, tau_hi: float):
    if r <= 0.0:
        raise DomainError(f"r must be positive, got {r}")
    if not (tau_lo * r < s < tau_hi * r):
        raise DomainError(
            f"point (r={r}, s={s}) outside the cone s/r in ({tau_lo}, {tau_hi})")


@dataclass(frozen=True)
class ExprSource:
    """phi given in closed form."""

    expr: Expr
    name: str = "expr"
    tau_lo: float = -1.0
    tau_hi: float = 1.0

    def phi_jet(self, r: float, s: float,
                order_r: int = DEFAULT_ORDER_R,
                order_s: int = DEFAULT_ORDER_S) -> Jet:
        _check_point(r, s, self.tau_lo, self.tau_hi)
        return eval_jet(self.expr, r, s, order_r, order_s)

    def phi_value(self, r: float, s: float) -> float:
        _check_point(r, s, self.tau_lo, self.tau_hi)
        return eval_scalar(self.expr, r, s)


@dataclass
class LogDerivSource:
    """phi defined by (phi_s/phi, phi_r/phi) and an anchor phi(anchor_r, 0).

    ell_fn and em_fn map (r, s, order_r, order_s) to jets of the two
    log-derivatives.  The s = 0 radial spine of ln(phi) is cached per r.
    """

    ell_fn: object
    em_fn: object
    anchor_r: float
    anchor_phi: float
    name: str = "logderiv"
    tau_lo: float = -1.0
    tau_hi: float = 1.0
    quad_tol: float = 1e-12
    ell_value: object = None  # optional fast (r, s) -> float paths
    em_value: object = None
    _spine: dict = field(default_factory=dict, repr=False)
    _column: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.ell_value is None:
            self.ell_value = lambda r, s: self.ell_fn(r, s, 0, 0).value
        if self.em_value is None:
            self.em_value = lambda r, s: self.em_fn(r, s, 0, 0).value

    def _log_spine(self, r: float) -> float:
        cached = self._spine.get(r)
        if cached is None:
            cached = math.log(self.anchor_phi) + adaptive_simpson(
                lambda rho: self.em_value(rho, 0.0),
                self.anchor_r, r, self.quad_tol)
            self._spine[r] = cached
        return cached

    def log_phi(self, r: float, s: float) -> float:
        _check_point(r, s, self.tau_lo, self.tau_hi)
        base_s, base_val = 0.0, self._log_spine(r)
        cached = self._column.get(r)
        # grid sweeps walk s monotonically at fixed r; integrating from the
        # last column point instead of from 0 makes such sweeps linear cost
        if cached is not None and abs(s - cached[0]) < abs(s - base_s):
            base_s, base_val = cached
        value = base_val + adaptive_simpson(
            lambda sig: self.ell_value(r, sig), base_s, s, self.quad_tol)
        self._column[r] = (s, value)
        return value

    def phi_value(self, r: float, s: float) -> float:
        return math.exp(self.log_phi(r, s))

    def phi_jet(self, r: float, s: float,
                order_r: int = DEFAULT_ORDER_R,
                order_s: int = DEFAULT_ORDER_S) -> Jet:
        if order_r > 1:
            raise DomainError("log-derivative sources carry one r-derivative")
        lam = np.zeros((order_r + 1, order_s + 1))
        lam[0, 0] = self.log_phi(r, s)
        if order_s >= 1:
            ell = self.ell_fn(r, s, 0, order_s - 1)
            lam[0, 1:] = ell.c[0, :order_s]
        if order_r == 1:
            em = self.em_fn(r, s, 0, order_s)
            lam[1, :] = em.c[0, :]
        return jet_apply("exp", Jet(c=lam, r0=r, s0=s))

    def mixed_partial_residual(self, r: float, s: float) -> float:
        """|d_r(ell) - d_s(m)| by jets; zero when the pair is integrable."""
        dr_ell = self.ell_fn(r, s, 1, 0).deriv(1, 0)
        ds_em = self.em_fn(r, s, 0, 1).deriv(0, 1)
        return abs(dr_ell - ds_em)


def _expr_jet_fn(expr: Expr):
    def fn(r, s, order_r, order_s):
        return eval_jet(expr, r, s, order_r, order_s)
    return fn


def as_source(source):
    """Coerce a string, expression tree, registry entry, or source object."""
    if isinstance(source, str):
        source = parse(source)
    if isinstance(source, Expr):
        return ExprSource(expr=source, name=print_expr(source))
    if isinstance(source, BuiltinMetric):
        return source_for(source)
    if hasattr(source, "phi_jet"):
        return source
    raise TypeError(f"cannot build a metric source from {type(source).__name__}")


def source_for(metric: BuiltinMetric):
    """Wrap a registry entry in the matching source type."""
    if metric.kind == "closed_form":
        return ExprSource(expr=metric.expr, name=metric.name,
                          tau_lo=metric.tau_lo, tau_hi=metric.tau_hi)
    return LogDerivSource(
        ell_fn=_expr_jet_fn(metric.ell),
        em_fn=_expr_jet_fn(metric.em),
        anchor_r=metric.anchor_r,
        anchor_phi=metric.anchor_phi,
        name=metric.name,
        tau_lo=metric.tau_lo,
        tau_hi=metric.tau_hi,
        ell_value=lambda r, s: eval_scalar(metric.ell, r, s),
        em_value=lambda r, s: eval_scalar(metric.em, r, s),
    )
