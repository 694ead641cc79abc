"""Truncated bivariate Taylor jets in (r, s) and an independent FD oracle.

A Jet stores the mixed partial derivatives d_r^a d_s^b f(r0, s0) for
0 <= a <= order_r, 0 <= b <= order_s in a dense array.  The default
truncation (1, 5) carries the twelve partials every downstream formula
needs: the spray functions P, Q consume phi_r, phi_rs and s-derivatives of
phi up to order five, and nothing in scope differentiates twice in r.

Coefficients are derivative values, not monomial coefficients, so products
follow the two-variable Leibniz rule with binomial weights and division
solves the corresponding triangular system.  Elementary functions are
applied by composing the univariate Taylor expansion around the jet's
constant term with a Horner sweep; this terminates exactly because the
augmentation ideal of the truncated algebra is nilpotent of index
order_r + order_s + 1.

fd_oracle shares no code with the jet arithmetic.  It runs central
stencils on a shrinking ladder of steps with Neville extrapolation
(Ridders' scheme) and is the reference every jet coefficient is tested
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Jet",
    "DomainError",
    "DivisionByZeroJet",
    "StencilOutOfDomain",
    "jet_constant",
    "jet_seed_r",
    "jet_seed_s",
    "jet_apply",
    "fd_oracle",
]

DEFAULT_ORDER_R = 1
DEFAULT_ORDER_S = 5

# Divisor constant terms below this magnitude are treated as zero.
DIV_GUARD = 1e-13


class DomainError(ValueError):
    """An elementary function was evaluated outside its real domain."""


class DivisionByZeroJet(ZeroDivisionError):
    """Jet division where the divisor's constant term is (near) zero."""


class StencilOutOfDomain(ValueError):
    """A finite-difference stencil point left the caller's domain."""


_BINOM = np.array([[math.comb(n, k) for k in range(8)] for n in range(8)], dtype=float)


def _leibniz(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """(fg)[a,b] = sum_{i<=a, j<=b} C(a,i) C(b,j) f[i,j] g[a-i,b-j]."""
    ra, sa = f.shape
    out = np.zeros((ra, sa))
    for a in range(ra):
        for b in range(sa):
            acc = 0.0
            for i in range(a + 1):
                cai = _BINOM[a, i]
                for j in range(b + 1):
                    acc += cai * _BINOM[b, j] * f[i, j] * g[a - i, b - j]
            out[a, b] = acc
    return out


def _leibniz_solve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Solve g*h = f for h, marching through (a,b) in graded order."""
    ra, sa = f.shape
    g00 = g[0, 0]
    out = np.zeros((ra, sa))
    for a in range(ra):
        for b in range(sa):
            acc = f[a, b]
            for i in range(a + 1):
                cai = _BINOM[a, i]
                for j in range(b + 1):
                    if i == 0 and j == 0:
                        continue
                    acc -= cai * _BINOM[b, j] * g[i, j] * out[a - i, b - j]
            out[a, b] = acc / g00
    return out


@dataclass(frozen=True)
class Jet:
    """Derivatives c[a, b] = d_r^a d_s^b f at the base point (r0, s0)."""

    c: np.ndarray
    r0: float
    s0: float

    # -- accessors ---------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.c[0, 0])

    def deriv(self, a: int, b: int) -> float:
        """The partial derivative d_r^a d_s^b f."""
        return float(self.c[a, b])

    @property
    def shape(self) -> tuple[int, int]:
        return self.c.shape

    def ds(self) -> "Jet":
        """Jet of d_s f (one s-order shallower)."""
        return Jet(self.c[:, 1:].copy(), self.r0, self.s0)

    def dr(self) -> "Jet":
        """Jet of d_r f (no further r-derivatives available)."""
        return Jet(self.c[1:, :].copy(), self.r0, self.s0)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.c.shape != self.c.shape:
                raise ValueError(
                    f"jet shape mismatch: {self.c.shape} vs {other.c.shape}"
                )
            if other.r0 != self.r0 or other.s0 != self.s0:
                raise ValueError("jets have different base points")
            return other
        if isinstance(other, (int, float)):
            c = np.zeros_like(self.c)
            c[0, 0] = float(other)
            return Jet(c, self.r0, self.s0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.c + o.c, self.r0, self.s0)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.c - o.c, self.r0, self.s0)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(o.c - self.c, self.r0, self.s0)

    def __neg__(self):
        return Jet(-self.c, self.r0, self.s0)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if isinstance(other, (int, float)):
            return Jet(self.c * float(other), self.r0, self.s0)
        return Jet(_leibniz(self.c, o.c), self.r0, self.s0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if isinstance(other, (int, float)):
            return Jet(self.c / float(other), self.r0, self.s0)
        if abs(o.c[0, 0]) < DIV_GUARD:
            raise DivisionByZeroJet(
                f"divisor constant term {o.c[0, 0]!r} below guard {DIV_GUARD}"
            )
        return Jet(_leibniz_solve(self.c, o.c), self.r0, self.s0)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o.__truediv__(self)

    def __pow__(self, p):
        if isinstance(p, (int, float)):
            return jet_apply("pow", self, exponent=float(p))
        return NotImplemented

    def __repr__(self):
        return f"Jet(value={self.value:.6g}, shape={self.c.shape}, at=({self.r0:.4g},{self.s0:.4g}))"


# -- constructors ------------------------------------------------------------


def jet_constant(value: float, r0: float, s0: float,
                 order_r: int = DEFAULT_ORDER_R, order_s: int = DEFAULT_ORDER_S) -> Jet:
    c = np.zeros((order_r + 1, order_s + 1))
    c[0, 0] = float(value)
    return Jet(c, r0, s0)


def jet_seed_r(r0: float, s0: float,
               order_r: int = DEFAULT_ORDER_R, order_s: int = DEFAULT_ORDER_S) -> Jet:
    """The coordinate function (r, s) -> r as a jet."""
    c = np.zeros((order_r + 1, order_s + 1))
    c[0, 0] = float(r0)
    if order_r >= 1:
        c[1, 0] = 1.0
    return Jet(c, r0, s0)


def jet_seed_s(r0: float, s0: float,
               order_r: int = DEFAULT_ORDER_R, order_s: int = DEFAULT_ORDER_S) -> Jet:
    """The coordinate function (r, s) -> s as a jet."""
    c = np.zeros((order_r + 1, order_s + 1))
    c[0, 0] = float(s0)
    if order_s >= 1:
        c[0, 1] = 1.0
    return Jet(c, r0, s0)


# -- elementary compositions -------------------------------------------------


def _derivs_sqrt(x: float, order: int) -> list[float]:
    if x <= 0.0:
        raise DomainError(f"sqrt of non-positive value {x!r}")
    out = [math.sqrt(x)]
    fall = 1.0
    for k in range(1, order + 1):
        fall *= 0.5 - (k - 1)
        out.append(fall * x ** (0.5 - k))
    return out


def _derivs_exp(x: float, order: int) -> list[float]:
    e = math.exp(x)
    return [e] * (order + 1)


def _derivs_ln_abs(x: float, order: int) -> list[float]:
    if x == 0.0:
        raise DomainError("ln_abs at zero")
    out = [math.log(abs(x))]
    for k in range(1, order + 1):
        out.append((-1.0) ** (k - 1) * math.factorial(k - 1) / x ** k)
    return out


def _derivs_pow(x: float, p: float, order: int) -> list[float]:
    is_int = abs(p - round(p)) < 1e-12
    out = []
    fall = 1.0
    for k in range(order + 1):
        if k > 0:
            fall *= p - (k - 1)
        if fall == 0.0:
            out.append(0.0)
            continue
        e = p - k
        if x == 0.0:
            if e < 0:
                raise DomainError("pow at zero base with negative effective exponent")
            out.append(fall if e == 0 else 0.0)
        elif x < 0.0:
            if not is_int:
                raise DomainError(f"fractional power {p!r} of negative base {x!r}")
            ei = int(round(p)) - k
            mag = abs(x) ** ei
            out.append(fall * (mag if ei % 2 == 0 else -mag))
        else:
            out.append(fall * x ** e)
    return out


def _compose(derivs: list[float], jet: Jet) -> Jet:
    """Horner evaluation of sum_k derivs[k]/k! * (jet - jet.value)^k."""
    order = len(derivs) - 1
    ghat = jet.c.copy()
    ghat[0, 0] = 0.0
    out = np.zeros_like(jet.c)
    out[0, 0] = derivs[order] / math.factorial(order)
    for k in range(order - 1, -1, -1):
        out = _leibniz(out, ghat)
        out[0, 0] += derivs[k] / math.factorial(k)
    return Jet(out, jet.r0, jet.s0)


def jet_apply(fn: str, jet: Jet, exponent: float | None = None) -> Jet:
    """Apply an elementary function to a jet.

    fn is one of 'sqrt', 'exp', 'ln_abs', 'arctanh_re', 'abs', 'pow'
    ('pow' takes the constant exponent as a keyword).  arctanh_re is the
    real branch 0.5*ln|(1+x)/(1-x)|, defined for |x| != 1 on both sides
    of the unit interval.
    """
    order = jet.c.shape[0] - 1 + jet.c.shape[1] - 1
    x0 = float(jet.c[0, 0])
    if fn == "sqrt":
        return _compose(_derivs_sqrt(x0, order), jet)
    if fn == "exp":
        return _compose(_derivs_exp(x0, order), jet)
    if fn == "ln_abs":
        return _compose(_derivs_ln_abs(x0, order), jet)
    if fn == "arctanh_re":
        if abs(abs(x0) - 1.0) < 1e-13:
            raise DomainError(f"arctanh_re at singular argument {x0!r}")
        one = jet_constant(1.0, jet.r0, jet.s0,
                           jet.c.shape[0] - 1, jet.c.shape[1] - 1)
        return 0.5 * (jet_apply("ln_abs", one + jet) - jet_apply("ln_abs", one - jet))
    if fn == "abs":
        if x0 == 0.0:
            raise DomainError("abs is not differentiable at zero")
        return jet if x0 > 0 else -jet
    if fn == "pow":
        if exponent is None:
            raise ValueError("pow requires an exponent")
        return _compose(_derivs_pow(x0, float(exponent), order), jet)
    raise ValueError(f"unknown elementary function {fn!r}")


# -- finite-difference oracle -------------------------------------------------

# Central stencils of second-order accuracy: offsets and weights, to be
# divided by h**m.
_CENTRAL = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
    5: ((-3, -2, -1, 1, 2, 3), (-0.5, 2.0, -2.5, 2.5, -2.0, 0.5)),
}


# A fixed step cannot serve both flat inputs (roundoff-limited, wants big
# h) and near-pole inputs (truncation-limited, wants small h), so each
# one-dimensional derivative self-tunes: central stencils evaluated on a
# geometrically shrinking ladder of steps fill a Neville tableau in powers
# of h^2, and the entry that agrees best with its two parents wins
# (Ridders' scheme).  Rungs whose stencil span leaves the domain are
# skipped from the top of the ladder.
_FD_H0 = 0.12
_FD_FACTOR = 1.6
_FD_RUNGS = 9
_FD_MAX_SHRINKS = 24


def _fd_1d(g, x0: float, order: int) -> float:
    if order == 0:
        return g(x0)
    offsets, weights = _CENTRAL[order]

    def estimate(h):
        acc = 0.0
        for o, w in zip(offsets, weights):
            acc += w * g(x0 + o * h)
        return acc / h ** order

    h = _FD_H0 * max(1.0, abs(x0))
    first = None
    for _ in range(_FD_MAX_SHRINKS):
        try:
            first = estimate(h)
            break
        except StencilOutOfDomain:
            h /= _FD_FACTOR
    if first is None:
        return estimate(h)  # raises StencilOutOfDomain with the culprit point

    fac2 = _FD_FACTOR * _FD_FACTOR
    tableau = [[0.0] * _FD_RUNGS for _ in range(_FD_RUNGS)]
    tableau[0][0] = first
    best, err_best = first, math.inf
    for i in range(1, _FD_RUNGS):
        h /= _FD_FACTOR
        tableau[0][i] = estimate(h)
        fac = fac2
        for j in range(1, i + 1):
            tij = (tableau[j - 1][i] * fac - tableau[j - 1][i - 1]) / (fac - 1.0)
            tableau[j][i] = tij
            fac *= fac2
            err = max(abs(tij - tableau[j - 1][i]), abs(tij - tableau[j - 1][i - 1]))
            if err <= err_best:
                err_best, best = err, tij
    return best


def fd_oracle(f, r0: float, s0: float, order_r: int, order_s: int,
              domain=None) -> float:
    """Estimate d_r^order_r d_s^order_s f(r0, s0) by central differences.

    f is a plain callable (r, s) -> float.  Mixed derivatives nest the
    one-dimensional estimators: an adaptive s-derivative runs at each
    outer r-stencil point.  domain, if given, is a predicate
    (r, s) -> bool; the ladder shrinks until its stencil fits inside, and
    raises StencilOutOfDomain if no rung fits.

    Worst relative error observed on smooth but harsh inputs (rational
    metrics near their poles): ~1e-9 for s-orders <= 3, ~1e-5 for
    s-orders 4 and 5.
    """
    if not 0 <= order_r <= 1:
        raise ValueError("order_r must be 0 or 1")
    if not 0 <= order_s <= 5:
        raise ValueError("order_s must be between 0 and 5")

    def sample(r, s):
        if domain is not None and not domain(r, s):
            raise StencilOutOfDomain(f"stencil point ({r!r}, {s!r}) left the domain")
        return f(r, s)

    if order_r == 0:
        if order_s == 0:
            return sample(r0, s0)
        return _fd_1d(lambda s: sample(r0, s), s0, order_s)

    if order_s == 0:
        return _fd_1d(lambda r: sample(r, s0), r0, 1)

    def s_deriv(r):
        return _fd_1d(lambda s: sample(r, s), s0, order_s)

    return _fd_1d(s_deriv, r0, 1)
