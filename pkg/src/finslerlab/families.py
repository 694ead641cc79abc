"""Spray families and the metrics compatible with them.

Three constructions are covered, all spherically symmetric:

* a one-functional-parameter family of sprays whose compatible metrics
  have vanishing Landsberg curvature (coefficients c1(r), c3(r) and a
  real constant c; the remaining coefficients c0(r), c2(r) are forced),
* a surface (n = 2) family with vanishing Berwald curvature, driven by
  radial coefficients a, b0..b3,
* a two-dimensional Berwald class parameterised by a constant c != 3
  and a radial coefficient c0(r).

A metric phi is recovered from a family through its log-derivatives
(phi_s/phi, phi_r/phi): the radial spine at s = 0 is integrated first,
then each s-column, and the exponential is applied once at the end.
Coefficient derivatives (c1', c3', c2', c0') are always taken from jets
of the coefficient expressions, never from finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expressions import Expr, Num, eval_jet, eval_scalar, expr_variables, parse
from .geometry import SprayData
from .jets import DomainError, Jet, jet_apply, jet_seed_r, jet_seed_s
from .sources import LogDerivSource, adaptive_simpson

__all__ = [
    "ConstraintViolated",
    "NonRealC2",
    "DenominatorVanished",
    "ExcludedParameter",
    "LandsbergFamily",
    "SurfaceBerwaldFamily",
    "GridSpec",
    "PhiReconstruction",
    "compatibility_residuals",
    "build_landsberg_family",
    "logderiv_phi",
    "reconstruct_phi",
    "surface_berwald_spray",
    "zhou_class_spray",
]


class ConstraintViolated(ValueError):
    """A coefficient hits one of the excluded loci on the working interval."""

    def __init__(self, condition: str, r: float):
        self.condition = condition
        self.r = r
        super().__init__(f"{condition} at r = {r:.12g}")


class NonRealC2(ArithmeticError):
    """(c1 r^2 + 1)(2 c3 r^2 - 1) < 0 with c != 0, so c2 is not real."""

    def __init__(self, r: float, radicand: float):
        self.r = r
        self.radicand = radicand
        super().__init__(
            f"(c1 r^2 + 1)(2 c3 r^2 - 1) = {radicand:.6g} < 0 at r = {r:.12g}"
        )


class DenominatorVanished(ArithmeticError):
    """The shared denominator of the log-derivative pair vanishes."""

    def __init__(self, r: float, s: float, value: float):
        self.r = r
        self.s = s
        self.value = value
        super().__init__(
            f"log-derivative denominator {value:.6g} vanishes at (r, s) = "
            f"({r:.12g}, {s:.12g})"
        )


class ExcludedParameter(ValueError):
    """Parameter values the two-dimensional Berwald class does not admit."""


# -- compatibility ------------------------------------------------------------


def compatibility_residuals(phi: Jet, pq: SprayData) -> tuple[float, float]:
    """Residuals of the two conditions tying a metric to a spray (P, Q).

    C1 = (1 + s P - (r^2 - s^2)(2Q - s Q_s)) phi_s
         + (s P_s - 2 P - s (2Q - s Q_s)) phi
    C2 = phi_r / r - (P + Q_s (r^2 - s^2)) phi_s - (P_s + s Q_s) phi

    Both vanish identically when (P, Q) is the spray of phi.  Residuals
    are returned raw; divide by phi for a scale-free comparison.
    """
    if phi.shape[0] < 2 or phi.shape[1] < 2:
        raise DomainError("compatibility residuals need a jet of orders (1, 1)")
    r, s = phi.r0, phi.s0
    if abs(phi.r0 - pq.r) > 1e-12 or abs(phi.s0 - pq.s) > 1e-12:
        raise ValueError("phi jet and spray data sit at different points")
    p = phi.value
    ps = phi.deriv(0, 1)
    pr = phi.deriv(1, 0)
    w2 = r * r - s * s
    qq = 2.0 * pq.Q - s * pq.Q_s
    c1 = (1.0 + s * pq.P - w2 * qq) * ps + (s * pq.P_s - 2.0 * pq.P - s * qq) * p
    c2 = pr / r - (pq.P + pq.Q_s * w2) * ps - (pq.P_s + s * pq.Q_s) * p
    return c1, c2


# -- coefficient closure ------------------------------------------------------


def _radial(value, pname: str) -> Expr:
    """Coerce a string/number to an expression in r alone."""
    if isinstance(value, (int, float)):
        return Num(float(value))
    e = parse(value) if isinstance(value, str) else value
    bad = expr_variables(e) - {"r"}
    if bad:
        raise ValueError(
            f"coefficient {pname} must be a function of r only, found {sorted(bad)}"
        )
    return e


def _rtrunc(j: Jet, rows: int) -> Jet:
    return Jet(j.c[:rows, :].copy(), j.r0, j.s0)


@dataclass(frozen=True)
class _Coefficients:
    """Values and first r-derivatives of (c0, c1, c2, c3) at one radius."""

    c1: float
    c1_r: float
    c3: float
    c3_r: float
    c0: float
    c0_r: float
    c2: float
    c2_r: float
    f1: float  # c1 r^2 + 1
    f3: float  # 2 c3 r^2 - 1


def _coefficients(c1_expr: Expr, c3_expr: Expr, c: float, r: float,
                  tol: float) -> _Coefficients:
    """Close the coefficient system at radius r.

    c0 = -(4 c1 c3 (2 c3 + c1) r^3 - 2 (c1' c3 - c1 c3') r^2
           + 2 (4 c3^2 - c1^2) r + c1' + 2 c3')
         / (2 r (c1 r^2 + 1)(2 c3 r^2 - 1))
    c2 = c sqrt((c1 r^2 + 1)(2 c3 r^2 - 1))
    """
    jc1 = eval_jet(c1_expr, r, 0.0, 3, 0)
    jc3 = eval_jet(c3_expr, r, 0.0, 3, 0)
    # everything below works at r-order two so that jets and their dr() match
    c1j = _rtrunc(jc1, 3)
    c3j = _rtrunc(jc3, 3)
    c1p = jc1.dr()
    c3p = jc3.dr()
    jr = jet_seed_r(r, 0.0, 2, 0)
    jr2 = jr * jr

    f1 = c1j * jr2 + 1.0
    f3 = 2.0 * c3j * jr2 - 1.0
    s13 = c1j + 2.0 * c3j
    if abs(f1.value) <= tol * max(1.0, abs(c1j.value) * r * r):
        raise ConstraintViolated("c1 = -1/r^2", r)
    if abs(f3.value) <= tol * max(1.0, 2.0 * abs(c3j.value) * r * r):
        raise ConstraintViolated("c3 = 1/(2 r^2)", r)
    if abs(s13.value) <= tol * max(1.0, abs(c1j.value), 2.0 * abs(c3j.value)):
        raise ConstraintViolated("c1 + 2 c3 = 0", r)

    num = (4.0 * c1j * c3j * (2.0 * c3j + c1j) * jr2 * jr
           - 2.0 * (c1p * c3j - c1j * c3p) * jr2
           + 2.0 * (4.0 * c3j * c3j - c1j * c1j) * jr
           + c1p + 2.0 * c3p)
    c0j = -num / (2.0 * jr * f1 * f3)

    if c == 0.0:
        c2v, c2r = 0.0, 0.0
    else:
        rad = f1 * f3
        if rad.value <= 0.0:
            raise NonRealC2(r, rad.value)
        c2j = c * jet_apply("sqrt", rad)
        c2v, c2r = c2j.value, c2j.dr().value

    return _Coefficients(
        c1=c1j.value, c1_r=c1p.value,
        c3=c3j.value, c3_r=c3p.value,
        c0=c0j.value, c0_r=c0j.dr().value,
        c2=c2v, c2_r=c2r,
        f1=f1.value, f3=f3.value,
    )


def _closure_residuals(k: _Coefficients, r: float) -> tuple[float, float]:
    """The two radial identities the closed coefficient system satisfies.

    Both expressions vanish identically when c0 and c2 come from
    _coefficients; nonzero values flag a transcription or closure error.
    """
    a = r * r * (4.0 * k.c0 * k.c1 * k.c3 * r ** 5
                 + 2.0 * (2.0 * k.c0 * k.c3 + 2.0 * k.c1 ** 2 * k.c3
                          + 4.0 * k.c1 * k.c3 ** 2 - k.c0 * k.c1) * r ** 3
                 + 2.0 * (k.c1 * k.c3_r - k.c1_r * k.c3) * r * r
                 + 2.0 * (4.0 * k.c3 ** 2 - k.c0 - k.c1 ** 2) * r
                 + 2.0 * k.c3_r + k.c1_r)
    b = (4.0 * k.c0 * k.c2 * k.c3 * r ** 5
         + 2.0 * k.c2 * (2.0 * k.c1 * k.c3 + 4.0 * k.c3 ** 2 - k.c0) * r ** 3
         + 4.0 * (k.c2 * k.c3_r - k.c2_r * k.c3) * r * r
         + 2.0 * k.c2 * (2.0 * k.c3 - k.c1) * r
         + 2.0 * k.c2_r)
    return a, b


def _spray_from_sjets(r: float, s: float, jp: Jet, jq: Jet) -> SprayData:
    return SprayData(
        r=r, s=s,
        P=jp.deriv(0, 0), P_s=jp.deriv(0, 1),
        P_ss=jp.deriv(0, 2), P_sss=jp.deriv(0, 3),
        Q=jq.deriv(0, 0), Q_s=jq.deriv(0, 1),
        Q_ss=jq.deriv(0, 2), Q_sss=jq.deriv(0, 3),
    )


# -- the Landsberg-type family ------------------------------------------------


@dataclass
class LandsbergFamily:
    """Sprays P = c1 s + (c2/r^2) w, Q = (c0/2) s^2 - (c2 s/r^4) w + c3,
    with w = sqrt(r^2 - s^2) and (c0, c2) closed from (c1, c3, c).

    For c != 0 the compatible metrics are Landsberg and not Berwald; for
    c = 0 the spray is quadratic and the metrics are Riemannian.
    """

    c1_expr: Expr
    c3_expr: Expr
    c: float
    r_lo: float
    r_hi: float
    grid_r: np.ndarray
    a_values: np.ndarray
    b_values: np.ndarray
    tol: float = 1e-9
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def a_residual(self) -> float:
        return float(np.max(np.abs(self.a_values)))

    @property
    def b_residual(self) -> float:
        return float(np.max(np.abs(self.b_values)))

    def coefficients(self, r: float) -> _Coefficients:
        r = float(r)
        k = self._cache.get(r)
        if k is None:
            k = _coefficients(self.c1_expr, self.c3_expr, self.c, r, self.tol)
            self._cache[r] = k
        return k

    def c0(self, r: float) -> float:
        return self.coefficients(r).c0

    def c2(self, r: float) -> float:
        return self.coefficients(r).c2

    def spray(self, r: float, s: float) -> SprayData:
        k = self.coefficients(r)
        js = jet_seed_s(r, s, 0, 3)
        w = jet_apply("sqrt", r * r - js * js)
        jp = k.c1 * js + (k.c2 / r ** 2) * w
        jq = 0.5 * k.c0 * js * js - (k.c2 / r ** 4) * js * w + k.c3
        return _spray_from_sjets(r, s, jp, jq)

    # log-derivatives of the compatible metrics (scale drops out):
    #   phi_s/phi = ((c1 + 2 c3) r^2 s + 2 c2 w) / D
    #   phi_r/phi = ((2 c0 c2 r^4 + 4 (c1 + c3) c2 r^2 - 2 c2) s w
    #                + c0 c1 r^6 s^2 + (c0 + 4 c1 c3 + 2 c1^2) r^4 s^2
    #                - 2 c1 c3 r^6 + c1 r^4) / (r D)
    #   D = r^2 + (c1 + 2 c3) r^2 s^2 - 2 c3 r^4 + 2 c2 s w

    def _denominator(self, k: _Coefficients, r: float, s: float, w: float) -> float:
        d = (r * r + (k.c1 + 2.0 * k.c3) * r * r * s * s
             - 2.0 * k.c3 * r ** 4 + 2.0 * k.c2 * s * w)
        if abs(d) <= self.tol * max(1.0, r * r):
            raise DenominatorVanished(r, s, d)
        return d

    def ell(self, r: float, s: float) -> float:
        k = self.coefficients(r)
        w2 = r * r - s * s
        if w2 <= 0.0:
            raise DomainError(f"|s| >= r at (r, s) = ({r}, {s})")
        w = math.sqrt(w2)
        d = self._denominator(k, r, s, w)
        return ((k.c1 + 2.0 * k.c3) * r * r * s + 2.0 * k.c2 * w) / d

    def em(self, r: float, s: float) -> float:
        k = self.coefficients(r)
        w2 = r * r - s * s
        if w2 <= 0.0:
            raise DomainError(f"|s| >= r at (r, s) = ({r}, {s})")
        w = math.sqrt(w2)
        d = self._denominator(k, r, s, w)
        num = ((2.0 * k.c0 * k.c2 * r ** 4 + 4.0 * (k.c1 + k.c3) * k.c2 * r * r
                - 2.0 * k.c2) * s * w
               + k.c0 * k.c1 * r ** 6 * s * s
               + (k.c0 + 4.0 * k.c1 * k.c3 + 2.0 * k.c1 ** 2) * r ** 4 * s * s
               - 2.0 * k.c1 * k.c3 * r ** 6
               + k.c1 * r ** 4)
        return num / (r * d)

    def _logderiv_jets(self, r: float, s: float,
                       order_r: int, order_s: int) -> tuple[Jet, Jet]:
        if order_r > 1:
            raise DomainError("family log-derivatives carry one r-derivative")
        k = self.coefficients(r)

        def lift(val, der):
            c = np.zeros((order_r + 1, order_s + 1))
            c[0, 0] = val
            if order_r >= 1:
                c[1, 0] = der
            return Jet(c, r, s)

        C0 = lift(k.c0, k.c0_r)
        C1 = lift(k.c1, k.c1_r)
        C2 = lift(k.c2, k.c2_r)
        C3 = lift(k.c3, k.c3_r)
        jr = jet_seed_r(r, s, order_r, order_s)
        js = jet_seed_s(r, s, order_r, order_s)
        w = jet_apply("sqrt", jr * jr - js * js)
        jr2 = jr * jr
        jr4 = jr2 * jr2
        d = (jr2 + (C1 + 2.0 * C3) * jr2 * js * js
             - 2.0 * C3 * jr4 + 2.0 * C2 * js * w)
        if abs(d.value) <= self.tol * max(1.0, r * r):
            raise DenominatorVanished(r, s, d.value)
        ell = ((C1 + 2.0 * C3) * jr2 * js + 2.0 * C2 * w) / d
        em_num = ((2.0 * C0 * C2 * jr4 + 4.0 * (C1 + C3) * C2 * jr2 - 2.0 * C2)
                  * js * w
                  + C0 * C1 * jr4 * jr2 * js * js
                  + (C0 + 4.0 * C1 * C3 + 2.0 * C1 * C1) * jr4 * js * js
                  - 2.0 * C1 * C3 * jr4 * jr2
                  + C1 * jr4)
        return ell, em_num / (jr * d)

    def ell_jet(self, r: float, s: float,
                order_r: int = 0, order_s: int = 5) -> Jet:
        return self._logderiv_jets(r, s, order_r, order_s)[0]

    def em_jet(self, r: float, s: float,
               order_r: int = 0, order_s: int = 5) -> Jet:
        return self._logderiv_jets(r, s, order_r, order_s)[1]

    def mixed_partial_residual(self, r: float, s: float) -> float:
        """|d_r(phi_s/phi) - d_s(phi_r/phi)| by jets."""
        dr_ell = self.ell_jet(r, s, 1, 0).deriv(1, 0)
        ds_em = self.em_jet(r, s, 0, 1).deriv(0, 1)
        return abs(dr_ell - ds_em)

    def regularity_ratio(self, r: float, s: float) -> float:
        """(phi - s phi_s + (r^2 - s^2) phi_ss) / phi for the compatible
        metrics: equals -r^4 (c1 r^2 + 1)(2 c3 r^2 - 1) / D^2, which is
        negative wherever c2 is real and nonzero."""
        k = self.coefficients(r)
        w2 = r * r - s * s
        if w2 <= 0.0:
            raise DomainError(f"|s| >= r at (r, s) = ({r}, {s})")
        d = self._denominator(k, r, s, math.sqrt(w2))
        return -r ** 4 * k.f1 * k.f3 / (d * d)

    def source(self, anchor_r: float, anchor_phi: float = 1.0,
               tau_lo: float = -1.0, tau_hi: float = 1.0,
               name: str | None = None) -> LogDerivSource:
        """The compatible metric anchored at phi(anchor_r, 0) = anchor_phi."""
        return LogDerivSource(
            ell_fn=lambda r, s, a, b: self._logderiv_jets(r, s, a, b)[0],
            em_fn=lambda r, s, a, b: self._logderiv_jets(r, s, a, b)[1],
            anchor_r=anchor_r,
            anchor_phi=anchor_phi,
            name=name or "landsberg_family",
            tau_lo=tau_lo,
            tau_hi=tau_hi,
            ell_value=self.ell,
            em_value=self.em,
        )


def build_landsberg_family(c1, c3, c: float, r_interval,
                           grid_points: int = 33,
                           tol: float = 1e-9) -> LandsbergFamily:
    """Close (c1, c3, c) into a spray family over a radial interval.

    Validates the excluded loci c1 != -1/r^2, c3 != 1/(2 r^2) and
    c1 + 2 c3 != 0 pointwise on the validation grid, checks that c2 is
    real, and records the two closure residuals at every grid radius.
    """
    c1_expr = _radial(c1, "c1")
    c3_expr = _radial(c3, "c3")
    lo, hi = float(r_interval[0]), float(r_interval[1])
    if not (0.0 < lo < hi):
        raise ValueError(f"need 0 < r_lo < r_hi, got ({lo}, {hi})")
    if grid_points < 2:
        raise ValueError("validation grid needs at least two points")
    grid = np.linspace(lo, hi, grid_points)
    cache = {}
    a_vals = np.empty(grid_points)
    b_vals = np.empty(grid_points)
    prev = None
    for i, r in enumerate(grid):
        k = _coefficients(c1_expr, c3_expr, float(c), float(r), tol)
        cache[float(r)] = k
        a_vals[i], b_vals[i] = _closure_residuals(k, float(r))
        # a sign flip between nodes means a zero crossing inside the interval
        factors = (("c1 = -1/r^2", k.f1),
                   ("c3 = 1/(2 r^2)", k.f3),
                   ("c1 + 2 c3 = 0", k.c1 + 2.0 * k.c3))
        if prev is not None:
            for (cond, now), (_, before) in zip(factors, prev[1]):
                if now * before < 0.0:
                    r0 = prev[0]
                    root = r0 + (float(r) - r0) * before / (before - now)
                    raise ConstraintViolated(cond, root)
        prev = (float(r), factors)
    return LandsbergFamily(
        c1_expr=c1_expr, c3_expr=c3_expr, c=float(c),
        r_lo=lo, r_hi=hi, grid_r=grid,
        a_values=a_vals, b_values=b_vals,
        tol=tol, _cache=cache,
    )


def logderiv_phi(fam: LandsbergFamily, r: float, s: float) -> tuple[float, float]:
    """(phi_s/phi, phi_r/phi) of the metrics compatible with the family."""
    return fam.ell(r, s), fam.em(r, s)


# -- metric reconstruction ----------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Lattice rectangular in (r, tau), tau = s/r, inset from its edges."""

    r_lo: float
    r_hi: float
    nr: int = 16
    ns: int = 33
    tau_lo: float = -1.0
    tau_hi: float = 1.0
    eps: float = 1e-3

    def __post_init__(self):
        if not (0.0 < self.r_lo < self.r_hi):
            raise ValueError(f"need 0 < r_lo < r_hi, got ({self.r_lo}, {self.r_hi})")
        if self.nr < 2 or self.ns < 2:
            raise ValueError("grid needs nr >= 2 and ns >= 2")
        if not (-1.0 <= self.tau_lo < self.tau_hi <= 1.0):
            raise ValueError(f"need -1 <= tau_lo < tau_hi <= 1, got "
                             f"({self.tau_lo}, {self.tau_hi})")
        if not (0.0 < self.eps < 1.0):
            raise ValueError(f"need 0 < eps < 1, got {self.eps}")

    def r_values(self) -> np.ndarray:
        return np.linspace(self.r_lo, self.r_hi, self.nr)

    def tau_values(self) -> np.ndarray:
        inset = self.eps * (self.tau_hi - self.tau_lo)
        lo = max(self.tau_lo + inset, -(1.0 - self.eps))
        hi = min(self.tau_hi - inset, 1.0 - self.eps)
        return np.linspace(lo, hi, self.ns)


@dataclass(frozen=True)
class PhiReconstruction:
    """phi sampled on a (r, tau) lattice, with the integrability defect."""

    r_values: np.ndarray
    tau_values: np.ndarray
    s_values: np.ndarray
    phi: np.ndarray
    mixed_partial_residual: float
    anchor_r: float
    anchor_phi: float


def _value_fns(logderivs):
    if isinstance(logderivs, LandsbergFamily):
        return logderivs.ell, logderivs.em
    if isinstance(logderivs, tuple) and len(logderivs) == 2:
        return logderivs
    ell = getattr(logderivs, "ell_value", None)
    em = getattr(logderivs, "em_value", None)
    if ell is None or em is None:
        raise TypeError(
            "expected a LandsbergFamily, a log-derivative source, or an "
            "(ell, em) pair of callables"
        )
    return ell, em


def _residual_fn(logderivs, ell, em):
    exact = getattr(logderivs, "mixed_partial_residual", None)
    if exact is not None:
        return exact

    def by_differences(r, s):
        h = 1e-5 * max(1.0, r)
        dr_ell = (ell(r + h, s) - ell(r - h, s)) / (2.0 * h)
        ds_em = (em(r, s + h) - em(r, s - h)) / (2.0 * h)
        return abs(dr_ell - ds_em)

    return by_differences


def _cumulative(f, nodes: np.ndarray, start: float, tol: float) -> np.ndarray:
    """Antiderivative values of f at sorted nodes, zero at coordinate start."""
    order = np.argsort(nodes)
    acc = np.empty(len(nodes))
    running = 0.0
    prev = start
    # walk outward from start through the nodes above it, then below it
    above = [i for i in order if nodes[i] >= start]
    below = [i for i in order[::-1] if nodes[i] < start]
    for i in above:
        running += adaptive_simpson(f, prev, float(nodes[i]), tol)
        acc[i] = running
        prev = float(nodes[i])
    running = 0.0
    prev = start
    for i in below:
        running += adaptive_simpson(f, prev, float(nodes[i]), tol)
        acc[i] = running
        prev = float(nodes[i])
    return acc


def reconstruct_phi(logderivs, grid: GridSpec, anchor: tuple[float, float],
                    quad_tol: float = 1e-10) -> PhiReconstruction:
    """Integrate the log-derivative pair into phi on the lattice.

    The s = 0 spine is integrated first from the anchor radius, then each
    column in s; exp is applied once at the end.  The reported residual is
    the worst |d_r(phi_s/phi) - d_s(phi_r/phi)| over the lattice.
    """
    ell, em = _value_fns(logderivs)
    anchor_r, anchor_phi = float(anchor[0]), float(anchor[1])
    if not (grid.r_lo <= anchor_r <= grid.r_hi):
        raise ValueError(f"anchor radius {anchor_r} outside "
                         f"[{grid.r_lo}, {grid.r_hi}]")
    if anchor_phi <= 0.0:
        raise ValueError(f"anchor value must be positive, got {anchor_phi}")

    rs = grid.r_values()
    taus = grid.tau_values()
    spine = math.log(anchor_phi) + _cumulative(
        lambda rho: em(rho, 0.0), rs, anchor_r, quad_tol)

    s_grid = np.outer(rs, taus)
    lnphi = np.empty((grid.nr, grid.ns))
    for i, r in enumerate(rs):
        lnphi[i] = spine[i] + _cumulative(
            lambda sig: ell(float(r), sig), s_grid[i], 0.0, quad_tol)

    residual_at = _residual_fn(logderivs, ell, em)
    worst = 0.0
    for i, r in enumerate(rs):
        for s in s_grid[i]:
            worst = max(worst, residual_at(float(r), float(s)))

    return PhiReconstruction(
        r_values=rs, tau_values=taus, s_values=s_grid,
        phi=np.exp(lnphi), mixed_partial_residual=worst,
        anchor_r=anchor_r, anchor_phi=anchor_phi,
    )


# -- the surface Berwald family -----------------------------------------------


@dataclass(frozen=True)
class SurfaceBerwaldFamily:
    """Radial coefficients of the n = 2 family with vanishing Berwald
    curvature:

    P = b1 s + b2/w + b3 (r^2 - 2 s^2)/w
    Q = b0 s^2 + b1/2 + b2 s (r^2 - 2 s^2)/(r^4 w)
        - b3 s (3 r^2 - 4 s^2)/(r^2 w) - (a/r^2) s w

    The b3 term in Q integrates the b3 term of P: with w = sqrt(r^2 - s^2),
    d/ds[(4 s^2 - 3 r^2)/(r^2 s w)] = (3 r^2 - 2 s^2)/(s^2 w^3), which is
    what s^3 (Q/s^2)_s = -P_s + ... forces.  Any other s-shape here breaks
    K = P_ss - Q_s + s Q_ss proportional to (r^2 - s^2)^(-3/2) and with it
    the vanishing of the Berwald curvature.
    """

    a: object = 0.0
    b0: object = 0.0
    b1: object = 0.0
    b2: object = 0.0
    b3: object = 0.0

    def __post_init__(self):
        for pname in ("a", "b0", "b1", "b2", "b3"):
            object.__setattr__(self, pname, _radial(getattr(self, pname), pname))


def surface_berwald_spray(fam: SurfaceBerwaldFamily, r: float,
                          s: float) -> SprayData:
    av = eval_scalar(fam.a, r, 0.0)
    b0 = eval_scalar(fam.b0, r, 0.0)
    b1 = eval_scalar(fam.b1, r, 0.0)
    b2 = eval_scalar(fam.b2, r, 0.0)
    b3 = eval_scalar(fam.b3, r, 0.0)
    js = jet_seed_s(r, s, 0, 3)
    w = jet_apply("sqrt", r * r - js * js)
    jp = b1 * js + b2 / w + b3 * (r * r - 2.0 * js * js) / w
    jq = (b0 * js * js + 0.5 * b1
          + b2 * js * (r * r - 2.0 * js * js) / (r ** 4) / w
          + b3 * js * (4.0 * js * js - 3.0 * r * r) / (r * r) / w
          - (av / (r * r)) * js * w)
    return _spray_from_sjets(r, s, jp, jq)


# -- the two-dimensional Berwald class ----------------------------------------


def zhou_class_spray(c: float, c0, r: float, s: float,
                     tol: float = 1e-9) -> SprayData:
    """P = -s/r^2 + (c/r^2) w,
    Q = c0 - ((4 r^4 c0^2 + 2 r^3 c0' + c^2)/(2 r^4 (2 r^2 c0 - 1))) s^2
        - (s/r^4) w,
    for a constant c != 3 and radial c0 with 2 r^2 c0 - 1 != 0."""
    if float(c) == 3.0:
        raise ExcludedParameter("the class excludes the constant c = 3")
    c0_expr = _radial(c0, "c0")
    j = eval_jet(c0_expr, r, 0.0, 1, 0)
    c0v, c0r = j.value, j.deriv(1, 0)
    den = 2.0 * r * r * c0v - 1.0
    if abs(den) <= tol * max(1.0, 2.0 * r * r * abs(c0v)):
        raise ExcludedParameter(f"2 r^2 c0 - 1 vanishes at r = {r:.12g}")
    js = jet_seed_s(r, s, 0, 3)
    w = jet_apply("sqrt", r * r - js * js)
    jp = -js / (r * r) + (c / (r * r)) * w
    q2 = (4.0 * r ** 4 * c0v * c0v + 2.0 * r ** 3 * c0r + c * c) / (2.0 * r ** 4 * den)
    jq = c0v - q2 * js * js - (js / r ** 4) * w
    return _spray_from_sjets(r, s, jp, jq)
