"""Pointwise curvature objects of a spherically symmetric Finsler metric.

A metric F = u*phi(r, s) on a ball in R^n, with r = |x|, u = |y| and
s = <x,y>/|y|, is determined by the single function phi.  From a (1, 5)
jet of phi at a point this module produces the spray functions P, Q and
their s-derivatives, the metric tensor and its inverse, the nonlinear
connection, and the Berwald, mean Berwald and Landsberg curvatures
together with the scalars H, K, lambda1, lambda2, L1, L2 that control
the Berwald/Landsberg classification.

Conventions.  All tensors are stored with every coordinate index down
against the standard Euclidean frame, where raising and lowering is the
identity.  Scalar outputs depend only on (r, s, u); tensor outputs are
reported in the frame of the PointFrame argument.  embed_point builds
the canonical representative x = (r, 0, ..., 0) with y in the span of
the first two axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import Jet

__all__ = [
    "BadFrame",
    "SprayUndefined",
    "DegenerateMetric",
    "PointFrame",
    "SprayData",
    "MetricData",
    "MeanBerwald",
    "LandsbergData",
    "SurfaceScalars",
    "CurvaturePacket",
    "embed_point",
    "frame_from_vectors",
    "spray_pq",
    "spray_coefficients",
    "metric_components",
    "nonlinear_connection",
    "berwald_curvature",
    "mean_berwald",
    "mean_berwald_direct",
    "mean_berwald_scalars",
    "scalar_trace_E",
    "landsberg_curvature",
    "landsberg_scalars",
    "surface_scalars",
    "curvature_packet",
]


class BadFrame(ValueError):
    """Point data violating r > 0, u > 0, |s| < r or n >= 2."""


class SprayUndefined(ArithmeticError):
    """The spray denominator phi - s*phi_s + (r^2-s^2)*phi_ss vanished.

    This happens exactly on the family phi = f1(r)*s + f2(r)*sqrt(r^2-s^2),
    for which the geodesic coefficients are not determined by phi.
    """

    def __init__(self, denominator: float):
        self.denominator = float(denominator)
        super().__init__(f"spray denominator vanished (value {denominator:.3e})")


class DegenerateMetric(ArithmeticError):
    """A factor required to invert the metric tensor vanished."""

    def __init__(self, factor: str, value: float):
        self.factor = factor
        self.value = float(value)
        super().__init__(f"degenerate metric: {factor} = {value:.3e}")


# -- frames ------------------------------------------------------------------


@dataclass(frozen=True)
class PointFrame:
    """A base point (x, y) in TR^n with its radial invariants.

    Invariants: |x| = r, |y| = u, <x,y> = s*u and |s| < r strictly.
    """

    n: int
    x: np.ndarray
    y: np.ndarray
    r: float
    u: float
    s: float


def _check_scalars(r: float, s: float, u: float, n: int) -> None:
    if n < 2:
        raise BadFrame(f"dimension n = {n} below 2")
    if not (r > 0.0) or not np.isfinite(r):
        raise BadFrame(f"radius r = {r!r} must be positive")
    if not (u > 0.0) or not np.isfinite(u):
        raise BadFrame(f"speed u = {u!r} must be positive")
    if not abs(s) < r:
        raise BadFrame(f"|s| = {abs(s)!r} must be strictly below r = {r!r}")


def embed_point(r: float, s: float, u: float, n: int) -> PointFrame:
    """Canonical frame for (r, s, u): x on axis 0, y in the 0-1 plane."""
    _check_scalars(r, s, u, n)
    x = np.zeros(n)
    x[0] = r
    y = np.zeros(n)
    y[0] = s * u / r
    y[1] = (u / r) * np.sqrt(r * r - s * s)
    return PointFrame(n=n, x=x, y=y, r=float(r), u=float(u), s=float(s))


def frame_from_vectors(x: np.ndarray, y: np.ndarray) -> PointFrame:
    """Frame at arbitrary position/velocity vectors of equal length."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise BadFrame(f"positions {x.shape} and velocities {y.shape} must match")
    r = float(np.linalg.norm(x))
    u = float(np.linalg.norm(y))
    if u == 0.0 or r == 0.0:
        raise BadFrame("x and y must both be nonzero")
    s = float(np.dot(x, y) / u)
    _check_scalars(r, s, u, x.size)
    return PointFrame(n=x.size, x=x.copy(), y=y.copy(), r=r, u=u, s=s)


def _check_frame_matches(phi: Jet, frame: PointFrame) -> None:
    if abs(phi.r0 - frame.r) > 1e-9 * max(1.0, frame.r) or abs(phi.s0 - frame.s) > 1e-9 * max(1.0, frame.r):
        raise BadFrame(
            f"jet base point ({phi.r0}, {phi.s0}) disagrees with frame ({frame.r}, {frame.s})"
        )


# -- spray functions ----------------------------------------------------------


@dataclass(frozen=True)
class SprayData:
    """P, Q and their s-derivatives through order three at (r, s)."""

    r: float
    s: float
    P: float
    P_s: float
    P_ss: float
    P_sss: float
    Q: float
    Q_s: float
    Q_ss: float
    Q_sss: float


def _sjet(values, r0: float, s0: float) -> Jet:
    """Univariate s-jet (order three) from its derivative list."""
    c = np.zeros((1, 4))
    c[0, : len(values)] = values
    return Jet(c=c, r0=r0, s0=s0)


def _slice_sjet(phi: Jet, a: int, b: int) -> Jet:
    """s-jet of the function s -> d_r^a d_s^b phi(r, s)."""
    return _sjet([phi.deriv(a, b + k) for k in range(4)], phi.r0, phi.s0)


def spray_pq(phi: Jet, tol: float = 1e-10) -> SprayData:
    """Spray functions from a phi-jet of orders at least (1, 5).

    Q = (1/2r) (-phi_r + s phi_rs + r phi_ss) / (phi - s phi_s + (r^2-s^2) phi_ss)
    P = -(Q/phi)(s phi + (r^2-s^2) phi_s) + (1/2r phi)(s phi_r + r phi_s)

    s-derivatives come from evaluating both formulas in univariate s-jet
    arithmetic, seeded with slices of the phi-jet.
    """
    rows, cols = phi.shape
    if rows < 2 or cols < 6:
        raise ValueError(f"spray_pq needs a jet of orders >= (1, 5), got {(rows - 1, cols - 1)}")
    r, s = phi.r0, phi.s0
    jp = _slice_sjet(phi, 0, 0)
    jps = _slice_sjet(phi, 0, 1)
    jpss = _slice_sjet(phi, 0, 2)
    jpr = _slice_sjet(phi, 1, 0)
    jprs = _slice_sjet(phi, 1, 1)
    jss = _sjet([s, 1.0], r, s)
    jw2 = r * r - jss * jss

    t_a = jss * jps
    t_b = jw2 * jpss
    denom = jp - t_a + t_b
    scale = max(1.0, abs(jp.value), abs(t_a.value), abs(t_b.value))
    if abs(denom.value) <= tol * scale:
        raise SprayUndefined(denom.value)

    jq = (-jpr + jss * jprs + r * jpss) / denom * (0.5 / r)
    jP = -(jq / jp) * (jss * jp + jw2 * jps) + (jss * jpr + r * jps) / jp * (0.5 / r)
    return SprayData(
        r=r, s=s,
        P=jP.deriv(0, 0), P_s=jP.deriv(0, 1), P_ss=jP.deriv(0, 2), P_sss=jP.deriv(0, 3),
        Q=jq.deriv(0, 0), Q_s=jq.deriv(0, 1), Q_ss=jq.deriv(0, 2), Q_sss=jq.deriv(0, 3),
    )


def spray_coefficients(pq: SprayData, frame: PointFrame) -> np.ndarray:
    """Geodesic coefficients G^i = u P y^i + u^2 Q x^i."""
    u = frame.u
    return u * pq.P * frame.y + u * u * pq.Q * frame.x


# -- metric tensor -------------------------------------------------------------


@dataclass(frozen=True)
class MetricData:
    sigma0: float
    sigma1: float
    sigma2: float
    sigma3: float
    rho0: float
    rho1: float
    rho2: float
    rho3: float
    g: np.ndarray
    g_inv: np.ndarray


def _sigma_rho(phi: Jet, tol: float = 1e-12):
    """Builder scalars of g and g^{-1}; raises DegenerateMetric."""
    r, s = phi.r0, phi.s0
    p = phi.deriv(0, 0)
    ps = phi.deriv(0, 1)
    pss = phi.deriv(0, 2)
    w2 = r * r - s * s

    if p <= tol:
        raise DegenerateMetric("phi", p)
    fa = p - s * ps
    if abs(fa) <= tol * max(1.0, abs(p), abs(s * ps)):
        raise DegenerateMetric("phi - s*phi_s", fa)
    fb = fa + w2 * pss
    if abs(fb) <= tol * max(1.0, abs(fa), abs(w2 * pss)):
        raise DegenerateMetric("phi - s*phi_s + (r^2 - s^2)*phi_ss", fb)

    sigma = (
        p * fa,
        ps * ps + p * pss,
        fa * ps - s * p * pss,
        s * s * p * pss - s * fa * ps,
    )
    # sigma2 reappears as the shared numerator of rho1 and rho2.
    numer = p * ps - s * ps * ps - s * p * pss
    rho = (
        1.0 / (p * fa),
        (s * p + w2 * ps) * numer / (p ** 3 * fa * fb),
        -numer / (p ** 2 * fa * fb),
        -pss / (p * fa * fb),
    )
    return sigma, rho


def metric_components(phi: Jet, frame: PointFrame, tol: float = 1e-12) -> MetricData:
    """Metric tensor g_ij, inverse g^ij and their builder scalars.

    g_ij   = sigma0 d_ij + sigma1 x_i x_j + (sigma2/u)(x_i y_j + y_i x_j)
             + (sigma3/u^2) y_i y_j
    g^ij   = rho0 d_ij + (rho1/u^2) y_i y_j + (rho2/u)(x_i y_j + y_i x_j)
             + rho3 x_i x_j
    """
    _check_frame_matches(phi, frame)
    sigma, rho = _sigma_rho(phi, tol=tol)
    u = frame.u
    eye = np.eye(frame.n)
    xx = np.outer(frame.x, frame.x)
    yy = np.outer(frame.y, frame.y)
    xy = np.outer(frame.x, frame.y)
    sym = xy + xy.T
    g = sigma[0] * eye + sigma[1] * xx + (sigma[2] / u) * sym + (sigma[3] / u ** 2) * yy
    g_inv = rho[0] * eye + (rho[1] / u ** 2) * yy + (rho[2] / u) * sym + rho[3] * xx
    return MetricData(*sigma, *rho, g=g, g_inv=g_inv)


# -- connection and curvatures -------------------------------------------------


def nonlinear_connection(pq: SprayData, frame: PointFrame) -> np.ndarray:
    """Matrix G^i_j = dG^i/dy^j, stored as [i, j]."""
    u, s = frame.u, frame.s
    eye = np.eye(frame.n)
    return (
        u * pq.P * eye
        + pq.P_s * np.outer(frame.y, frame.x)
        + ((pq.P - s * pq.P_s) / u) * np.outer(frame.y, frame.y)
        + u * pq.Q_s * np.outer(frame.x, frame.x)
        + (2.0 * pq.Q - s * pq.Q_s) * np.outer(frame.x, frame.y)
    )


def _updelta(mat: np.ndarray, eye: np.ndarray) -> np.ndarray:
    """d_ij M_kl + d_ik M_jl + d_il M_jk for symmetric M."""
    return (
        np.einsum("ij,kl->ijkl", eye, mat)
        + np.einsum("ik,jl->ijkl", eye, mat)
        + np.einsum("il,jk->ijkl", eye, mat)
    )


def _lowsym(vec: np.ndarray, eye: np.ndarray) -> np.ndarray:
    """d_jk v_l + d_jl v_k + d_kl v_j."""
    return (
        np.einsum("jk,l->jkl", eye, vec)
        + np.einsum("jl,k->jkl", eye, vec)
        + np.einsum("kl,j->jkl", eye, vec)
    )


def _outer3(vec: np.ndarray) -> np.ndarray:
    return np.einsum("j,k,l->jkl", vec, vec, vec)


def _one_of(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Symmetric sum with b in exactly one of the three slots, a elsewhere."""
    return (
        np.einsum("j,k,l->jkl", b, a, a)
        + np.einsum("j,k,l->jkl", a, b, a)
        + np.einsum("j,k,l->jkl", a, a, b)
    )


def _attach(t3: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """T_jkl v_i -> [i, j, k, l]."""
    return np.einsum("jkl,i->ijkl", t3, vec)


def berwald_curvature(pq: SprayData, frame: PointFrame) -> np.ndarray:
    """Berwald tensor B[i,j,k,l] = d^3 G^i / dy^j dy^k dy^l.

    Fifteen rank-one/rank-two building blocks; totally symmetric in
    (j, k, l), and every y-contraction vanishes by homogeneity.
    """
    s, u = frame.s, frame.u
    x, y = frame.x, frame.y
    eye = np.eye(frame.n)
    xx = np.outer(x, x)
    yy = np.outer(y, y)
    xy = np.outer(x, y)
    xsym = xy + xy.T

    P, P_s, P_ss, P_sss = pq.P, pq.P_s, pq.P_ss, pq.P_sss
    Q_s, Q_ss, Q_sss = pq.Q_s, pq.Q_ss, pq.Q_sss

    b = (P_ss / u) * _updelta(xx, eye)
    b += ((P - s * P_s) / u) * _updelta(eye, eye)
    b -= (s * P_ss / u ** 2) * _updelta(xsym, eye)
    b -= (s * P_ss / u ** 2) * _attach(_lowsym(x, eye), y)
    b += ((Q_s - s * Q_ss) / u) * _attach(_lowsym(x, eye), x)
    b += ((s * s * P_ss + s * P_s - P) / u ** 3) * (
        _updelta(yy, eye) + _attach(_lowsym(y, eye), y)
    )
    b += ((3.0 * P - s ** 3 * P_sss - 6.0 * s * s * P_ss - 3.0 * s * P_s) / u ** 5) * _attach(_outer3(y), y)
    b += (P_sss / u ** 2) * _attach(_outer3(x), y)
    b += ((s * s * P_sss + 3.0 * s * P_ss) / u ** 4) * _attach(_one_of(y, x), y)
    b -= ((P_ss + s * P_sss) / u ** 3) * _attach(_one_of(x, y), y)
    b += (Q_sss / u) * _attach(_outer3(x), x)
    b += ((s * s * Q_sss + s * Q_ss - Q_s) / u ** 3) * _attach(_one_of(y, x), x)
    b -= (s * Q_sss / u ** 2) * _attach(_one_of(x, y), x)
    b += ((3.0 * s * Q_s - 3.0 * s * s * Q_ss - s ** 3 * Q_sss) / u ** 4) * _attach(_outer3(y), x)
    b += ((s * s * Q_ss - s * Q_s) / u ** 2) * _attach(_lowsym(y, eye), x)
    return b


@dataclass(frozen=True)
class MeanBerwald:
    E: np.ndarray
    H: float
    H_s: float


def _h_and_slope(pq: SprayData, n: int) -> tuple[float, float]:
    """H and the factor W with H_s = -s W (W stays finite at s = 0)."""
    s = pq.s
    w2 = pq.r * pq.r - s * s
    h = (n + 1) * (pq.P - s * pq.P_s) + w2 * (pq.Q_s - s * pq.Q_ss)
    w = (n + 1) * pq.P_ss + 2.0 * (pq.Q_s - s * pq.Q_ss) + w2 * pq.Q_sss
    return h, w


def mean_berwald_direct(pq: SprayData, frame: PointFrame) -> np.ndarray:
    """E_ij assembled term by term from the trace of the Berwald display."""
    s, u, n = frame.s, frame.u, frame.n
    r2 = frame.r * frame.r
    h, w = _h_and_slope(pq, n)
    cyy = (
        (n + 1) * (s * s * pq.P_ss + s * pq.P_s - pq.P)
        + r2 * (s * s * pq.Q_sss + s * pq.Q_ss - pq.Q_s)
        + 3.0 * s * s * pq.Q_s
        - 3.0 * s ** 3 * pq.Q_ss
        - s ** 4 * pq.Q_sss
    )
    eye = np.eye(n)
    xy = np.outer(frame.x, frame.y)
    return (
        (h / u) * eye
        + (cyy / u ** 3) * np.outer(frame.y, frame.y)
        + (w / u) * np.outer(frame.x, frame.x)
        - (s * w / u ** 2) * (xy + xy.T)
    )


def mean_berwald(pq: SprayData, frame: PointFrame) -> MeanBerwald:
    """Mean Berwald curvature E_ij with the scalars H and H_s.

    E_ij = (H/u) d_ij - ((H - s^2 W)/u^3) y_i y_j + (W/u) x_i x_j
           - (s W/u^2)(x_i y_j + x_j y_i)

    where H_s = -s W; this form of the (H_s/s)-weighted display stays
    finite at s = 0.  A second assembly from the traced Berwald display
    is kept as an internal consistency guard.
    """
    s, u = frame.s, frame.u
    h, w = _h_and_slope(pq, frame.n)
    eye = np.eye(frame.n)
    xy = np.outer(frame.x, frame.y)
    e = (
        (h / u) * eye
        - ((h - s * s * w) / u ** 3) * np.outer(frame.y, frame.y)
        + (w / u) * np.outer(frame.x, frame.x)
        - (s * w / u ** 2) * (xy + xy.T)
    )
    direct = mean_berwald_direct(pq, frame)
    gap = float(np.abs(e - direct).max())
    scale = max(1.0, float(np.abs(e).max()))
    if gap > 1e-8 * scale:
        raise ArithmeticError(f"mean Berwald assemblies disagree by {gap:.3e}")
    return MeanBerwald(E=e, H=h, H_s=-s * w)


def mean_berwald_scalars(pq: SprayData, n: int) -> tuple[float, float]:
    """(H, H_s) without assembling the tensor; H_s = -s W stays exact at s = 0."""
    h, w = _h_and_slope(pq, n)
    return h, -pq.s * w


def scalar_trace_E(phi: Jet, pq: SprayData, n: int, u: float = 1.0) -> float:
    """Trace g^ij E_ij of the mean Berwald curvature.

    Equals (1/su)(s((n-1)rho0 + rho3(r^2-s^2))H - (r^2-s^2)(rho0 +
    rho3(r^2-s^2))H_s); substituting H_s = -s W removes the 1/s and the
    result below is exact for every s including s = 0.
    """
    _sigma, rho = _sigma_rho(phi)
    w2 = pq.r * pq.r - pq.s * pq.s
    h, w = _h_and_slope(pq, n)
    return (((n - 1) * rho[0] + rho[3] * w2) * h + w2 * (rho[0] + rho[3] * w2) * w) / u


@dataclass(frozen=True)
class LandsbergData:
    L: np.ndarray
    L1: float
    L2: float


def _l1_l2(phi: Jet, pq: SprayData) -> tuple[float, float]:
    p = phi.deriv(0, 0)
    ps = phi.deriv(0, 1)
    s = pq.s
    w2 = pq.r * pq.r - s * s
    mix = s * p + w2 * ps
    l1 = 3.0 * ps * pq.P_ss + p * pq.P_sss + mix * pq.Q_sss
    l2 = -s * p * pq.P_ss + ps * (pq.P - s * pq.P_s) + mix * (pq.Q_s - s * pq.Q_ss)
    return l1, l2


def landsberg_scalars(phi: Jet, pq: SprayData) -> tuple[float, float]:
    """The pair (L1, L2) that generates the Landsberg tensor."""
    return _l1_l2(phi, pq)


def landsberg_curvature(phi: Jet, pq: SprayData, frame: PointFrame) -> LandsbergData:
    """Landsberg tensor L[j,k,l] with its two generating scalars.

    L_jkl = -(phi/2)[ L1 x_j x_k x_l + ((3 s L2 - s^3 L1)/u^3) y_j y_k y_l
            + L2 (d_jk x_l + d_jl x_k + d_kl x_j)
            - (s L2/u)(d_jk y_l + d_jl y_k + d_kl y_j)
            - (s L1/u) (x x y symmetrized) + ((s^2 L1 - L2)/u^2) (y y x symmetrized) ]
    """
    _check_frame_matches(phi, frame)
    s, u = frame.s, frame.u
    x, y = frame.x, frame.y
    eye = np.eye(frame.n)
    p = phi.deriv(0, 0)
    l1, l2 = _l1_l2(phi, pq)
    t = (
        l1 * _outer3(x)
        + ((3.0 * s * l2 - s ** 3 * l1) / u ** 3) * _outer3(y)
        + l2 * _lowsym(x, eye)
        - (s * l2 / u) * _lowsym(y, eye)
        - (s * l1 / u) * _one_of(x, y)
        + ((s * s * l1 - l2) / u ** 2) * _one_of(y, x)
    )
    return LandsbergData(L=-0.5 * p * t, L1=l1, L2=l2)


@dataclass(frozen=True)
class SurfaceScalars:
    K: float
    lambda1: float
    lambda2: float
    combo: float


def surface_scalars(phi: Jet, pq: SprayData) -> SurfaceScalars:
    """Two-dimensional Landsberg diagnostics (n = 2 throughout).

    K = P_ss - Q_s + s Q_ss
    lambda1 = (1/s)(s H - (r^2-s^2) H_s), written with H_s = -s W so the
              value H + (r^2-s^2) W is exact down to s = 0
    lambda2 = (r^2-s^2) K_s - 3 s K
    combo   = (r^2-s^2) L1 + 3 L2, which equals lambda1 phi_s + lambda2 phi
    """
    s = pq.s
    w2 = pq.r * pq.r - s * s
    h, w = _h_and_slope(pq, 2)
    k = pq.P_ss - pq.Q_s + s * pq.Q_ss
    k_s = pq.P_sss + s * pq.Q_sss
    l1, l2 = _l1_l2(phi, pq)
    return SurfaceScalars(
        K=k,
        lambda1=h + w2 * w,
        lambda2=w2 * k_s - 3.0 * s * k,
        combo=w2 * l1 + 3.0 * l2,
    )


# -- one-call bundle -----------------------------------------------------------


@dataclass(frozen=True)
class CurvaturePacket:
    """Everything the classifier and the CLI report about one point."""

    frame: PointFrame
    pq: SprayData
    sigma0: float
    sigma1: float
    sigma2: float
    sigma3: float
    rho0: float
    rho1: float
    rho2: float
    rho3: float
    g: np.ndarray
    g_inv: np.ndarray
    Gmat: np.ndarray
    B: np.ndarray
    E: np.ndarray
    L: np.ndarray
    H: float
    H_s: float
    K: float
    lambda1: float
    lambda2: float
    L1: float
    L2: float
    Escalar: float


def curvature_packet(phi: Jet, frame: PointFrame) -> CurvaturePacket:
    """Assemble every tensor and scalar at one point.

    H and H_s use the frame's dimension; K, lambda1, lambda2 are the
    surface (n = 2) diagnostics regardless of n.
    """
    _check_frame_matches(phi, frame)
    pq = spray_pq(phi)
    met = metric_components(phi, frame)
    mb = mean_berwald(pq, frame)
    lb = landsberg_curvature(phi, pq, frame)
    surf = surface_scalars(phi, pq)
    return CurvaturePacket(
        frame=frame,
        pq=pq,
        sigma0=met.sigma0, sigma1=met.sigma1, sigma2=met.sigma2, sigma3=met.sigma3,
        rho0=met.rho0, rho1=met.rho1, rho2=met.rho2, rho3=met.rho3,
        g=met.g, g_inv=met.g_inv,
        Gmat=nonlinear_connection(pq, frame),
        B=berwald_curvature(pq, frame),
        E=mb.E, L=lb.L,
        H=mb.H, H_s=mb.H_s,
        K=surf.K, lambda1=surf.lambda1, lambda2=surf.lambda2,
        L1=lb.L1, L2=lb.L2,
        Escalar=scalar_trace_E(phi, pq, frame.n, u=frame.u),
    )
