"""Geodesic flow of F = u phi(r, s) with a first-integral drift monitor.

The right-hand side dy = -2G with G = u P y + u^2 Q x is the
Euler-Lagrange spray of F for whatever phi the source describes, so F
is constant along solutions in exact time integration no matter how
accurate phi itself is; the recorded drift isolates the time-stepping
error.  Only the values of P and Q enter the flow, so each evaluation
needs a phi-jet of orders (1, 2) rather than the (1, 5) jets the
curvature stack consumes.

InterpolatedSource turns a reconstruction lattice into such a source by
fitting a bicubic spline to ln(phi) over (r, tau): interpolating the
logarithm keeps phi positive, and the flow of the interpolant conserves
u * phi(interpolant) exactly, again up to time stepping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .expressions import DomainError
from .geometry import SprayUndefined
from .jets import Jet, jet_apply
from .sources import as_source

__all__ = [
    "DomainExit",
    "GeodesicState",
    "InterpolatedSource",
    "Trajectory",
    "integrate",
    "spray_rhs",
]


class DomainExit(RuntimeError):
    """The state left the region where the source defines a spray."""


@dataclass(frozen=True)
class GeodesicState:
    """Position, velocity, and time along a geodesic.

    Valid states have a nonzero velocity that is not parallel to the
    position: |<x, y>| / |y| < |x| strictly, so (r, s) stays inside the
    open cone |s| < r.
    """

    x: np.ndarray
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.shape != y.shape or x.size < 2:
            raise ValueError("state needs x and y of equal length >= 2")
        r = float(np.linalg.norm(x))
        u = float(np.linalg.norm(y))
        if not r > 0.0:
            raise ValueError("position sits at the origin")
        if not u > 0.0:
            raise ValueError("velocity must be nonzero")
        if abs(float(x @ y)) / u >= r:
            raise ValueError("velocity parallel to position: |s| = r is outside the cone")

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.x))

    @property
    def u(self) -> float:
        return float(np.linalg.norm(self.y))

    @property
    def s(self) -> float:
        return float(self.x @ self.y) / self.u


def _pq_values(jet: Jet, tol: float = 1e-10) -> tuple[float, float]:
    """Spray values (P, Q) from a phi-jet of orders at least (1, 2).

    Same formulas and degeneracy guard as the full jet-valued spray;
    only the constant terms are needed along a trajectory.
    """
    rows, cols = jet.shape
    if rows < 2 or cols < 3:
        raise ValueError(
            f"spray values need a jet of orders >= (1, 2), got {(rows - 1, cols - 1)}"
        )
    r, s = jet.r0, jet.s0
    p = jet.deriv(0, 0)
    ps = jet.deriv(0, 1)
    pss = jet.deriv(0, 2)
    pr = jet.deriv(1, 0)
    prs = jet.deriv(1, 1)
    w2 = r * r - s * s
    den = p - s * ps + w2 * pss
    scale = max(1.0, abs(p), abs(s * ps), abs(w2 * pss))
    if abs(den) <= tol * scale:
        raise SprayUndefined(den)
    if abs(p) <= tol:
        raise SprayUndefined(p)
    q = 0.5 * (-pr + s * prs + r * pss) / (r * den)
    pval = -(q / p) * (s * p + w2 * ps) + 0.5 * (s * pr + r * ps) / (r * p)
    return pval, q


def _rhs_factory(src, eps: float):
    """(x, y) -> (dx, dy, F) with the domain guards applied per call.

    The cone guard insets the source cone by eps of its width, matching
    the grid margin used everywhere else; RK4 substeps pass through here
    too, so a trajectory cannot silently sample outside the domain.
    """
    lo = getattr(src, "tau_lo", -1.0)
    hi = getattr(src, "tau_hi", 1.0)
    inset = eps * (hi - lo)
    tlo, thi = lo + inset, hi - inset

    def rhs(x: np.ndarray, y: np.ndarray):
        r = float(np.linalg.norm(x))
        u = float(np.linalg.norm(y))
        if r < 1e-8:
            raise DomainExit(f"radius shrank to {r:.3e}")
        if u == 0.0:
            raise DomainExit("velocity vanished")
        s = float(x @ y) / u
        if not (tlo * r < s < thi * r):
            raise DomainExit(
                f"s/r = {s / r:.6f} left the cone ({tlo:.6f}, {thi:.6f})"
            )
        try:
            jet = src.phi_jet(r, s, 1, 2)
        except DomainError as exc:
            raise DomainExit(str(exc)) from exc
        p, q = _pq_values(jet)
        return y, -2.0 * (u * p * y + u * u * q * x), u * jet.deriv(0, 0)

    return rhs


def spray_rhs(source, state: GeodesicState) -> tuple[np.ndarray, np.ndarray]:
    """(dx, dy) = (y, -2G) with G = u P y + u^2 Q x at the state's point."""
    src = as_source(source)
    dx, dy, _ = _rhs_factory(src, 0.0)(state.x, state.y)
    return dx, dy


@dataclass(frozen=True)
class Trajectory:
    """Sampled states with the first-integral record F = u phi.

    max_drift = max |F - F(0)| / F(0) over the samples.  completed is
    False when a domain guard stopped the integration early; the samples
    then end at the last state inside the domain and exit_reason says
    which guard fired.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    F: np.ndarray
    max_drift: float
    completed: bool
    exit_reason: str | None


def integrate(
    source,
    x0,
    y0,
    step: float = 1e-3,
    n_steps: int = 2000,
    eps: float = 1e-3,
) -> Trajectory:
    """Classical fixed-step RK4 for the spray flow, recording F each step.

    Raises DomainExit only when the initial state itself is outside the
    domain; a later exit returns the partial trajectory flagged with
    completed=False instead.
    """
    src = as_source(source)
    start = GeodesicState(x=x0, y=y0)
    rhs = _rhs_factory(src, eps)
    h = float(step)
    x, y, t = start.x.copy(), start.y.copy(), float(start.t)
    ts: list[float] = []
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    fs: list[float] = []
    completed = True
    reason = None

    def record(f: float):
        ts.append(t)
        xs.append(x.copy())
        ys.append(y.copy())
        fs.append(f)

    for _ in range(int(n_steps)):
        try:
            dx1, dy1, f = rhs(x, y)
            record(f)
            dx2, dy2, _ = rhs(x + 0.5 * h * dx1, y + 0.5 * h * dy1)
            dx3, dy3, _ = rhs(x + 0.5 * h * dx2, y + 0.5 * h * dy2)
            dx4, dy4, _ = rhs(x + h * dx3, y + h * dy3)
        except (DomainExit, SprayUndefined) as exc:
            completed = False
            reason = str(exc)
            break
        x = x + (h / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4)
        y = y + (h / 6.0) * (dy1 + 2.0 * dy2 + 2.0 * dy3 + dy4)
        t += h
    else:
        try:
            _, _, f = rhs(x, y)
            record(f)
        except (DomainExit, SprayUndefined) as exc:
            completed = False
            reason = str(exc)
    if not ts:
        raise DomainExit(reason or "initial state outside the domain")
    farr = np.array(fs)
    drift = float(np.max(np.abs(farr - farr[0])) / abs(farr[0]))
    return Trajectory(
        t=np.array(ts),
        x=np.array(xs),
        y=np.array(ys),
        F=farr,
        max_drift=drift,
        completed=completed,
        exit_reason=reason,
    )


class InterpolatedSource:
    """phi from a lattice, bicubic in (r, tau = s/r) on ln(phi).

    Jets stop at orders (1, 2): exactly what the spray right-hand side
    consumes, and the most a cubic in tau supports.  The jet is built by
    composing the spline's Taylor table at (r, tau) with the coordinate
    jets of r and tau = s/r, so the spray of the interpolant is evaluated
    exactly and u * phi stays a first integral of its flow.
    """

    def __init__(self, r_values, tau_values, phi, name: str = "interpolated"):
        r = np.asarray(r_values, dtype=float)
        tau = np.asarray(tau_values, dtype=float)
        values = np.asarray(phi, dtype=float)
        if r.size < 4 or tau.size < 4:
            raise ValueError("bicubic lattice needs at least 4 x 4 nodes")
        if values.shape != (r.size, tau.size):
            raise ValueError(
                f"phi lattice shape {values.shape} does not match "
                f"{(r.size, tau.size)} nodes"
            )
        if not np.all(values > 0.0):
            raise ValueError("phi must be positive on the lattice")
        spline = RectBivariateSpline(r, tau, np.log(values), kx=3, ky=3, s=0)
        self._parts = {(0, 0): spline}
        for a in (0, 1):
            for b in (0, 1, 2):
                if (a, b) != (0, 0):
                    self._parts[(a, b)] = spline.partial_derivative(a, b)
        self.name = name
        self.r_lo = float(r[0])
        self.r_hi = float(r[-1])
        self.tau_lo = float(tau[0])
        self.tau_hi = float(tau[-1])

    @classmethod
    def from_reconstruction(cls, rec, name: str = "interpolated"):
        return cls(rec.r_values, rec.tau_values, rec.phi, name=name)

    def _check(self, r: float, s: float) -> float:
        if not self.r_lo <= r <= self.r_hi:
            raise DomainError(
                f"r = {r} outside the lattice range [{self.r_lo}, {self.r_hi}]"
            )
        tau = s / r
        if not self.tau_lo <= tau <= self.tau_hi:
            raise DomainError(
                f"s/r = {tau} outside the lattice range [{self.tau_lo}, {self.tau_hi}]"
            )
        return tau

    def _ln(self, a: int, b: int, r: float, tau: float) -> float:
        return float(self._parts[(a, b)](r, tau)[0, 0])

    def phi_value(self, r: float, s: float) -> float:
        return math.exp(self._ln(0, 0, r, self._check(r, s)))

    def phi_jet(self, r: float, s: float, order_r: int = 1, order_s: int = 2) -> Jet:
        if order_r > 1 or order_s > 2:
            raise DomainError("bicubic lattice jets stop at orders (1, 2)")
        tau = self._check(r, s)
        rows, cols = order_r + 1, order_s + 1
        cr = np.zeros((rows, cols))
        cr[0, 0] = r
        if rows > 1:
            cr[1, 0] = 1.0
        cs = np.zeros((rows, cols))
        cs[0, 0] = s
        if cols > 1:
            cs[0, 1] = 1.0
        jr = Jet(cr, r, s)
        js = Jet(cs, r, s)
        d_r = jr - r
        d_tau = js / jr - tau
        ln_jet = (
            self._ln(0, 0, r, tau)
            + self._ln(0, 1, r, tau) * d_tau
            + 0.5 * self._ln(0, 2, r, tau) * (d_tau * d_tau)
            + self._ln(1, 0, r, tau) * d_r
            + self._ln(1, 1, r, tau) * (d_r * d_tau)
            + 0.5 * self._ln(1, 2, r, tau) * (d_r * (d_tau * d_tau))
        )
        return jet_apply("exp", ln_jet)
