import math

import numpy as np
import pytest

from finslerlab.expressions import builtin, parse
from finslerlab.jets import DomainError, fd_oracle
from finslerlab.sources import (
    ExprSource,
    IntegrationFailure,
    LogDerivSource,
    adaptive_simpson,
    source_for,
)


def test_adaptive_simpson_basic():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)
    assert adaptive_simpson(lambda x: x ** 5, -1.0, 2.0) == pytest.approx(
        (2.0 ** 6 - 1.0) / 6.0, rel=1e-12)
    assert adaptive_simpson(lambda x: 1.0, 3.0, 3.0) == 0.0
    # reversed limits flip the sign
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(
        1.0 - math.e, rel=1e-12)


def test_adaptive_simpson_failure():
    # sqrt has unbounded derivatives at 0; a tight tolerance with a shallow
    # depth cap cannot converge
    with pytest.raises(IntegrationFailure):
        adaptive_simpson(lambda x: math.sqrt(abs(x)), 0.0, 1.0,
                         tol=1e-15, max_depth=6)


def test_expr_source_round_trip():
    src = source_for(builtin("zhou2d_r5"))
    assert isinstance(src, ExprSource)
    r0, s0 = 1.1, 0.3
    w = math.sqrt(r0 ** 2 - s0 ** 2)
    ref = r0 ** -5 * w * math.exp(2 * s0 / w)
    assert src.phi_value(r0, s0) == pytest.approx(ref, rel=1e-13)
    with pytest.raises(DomainError):
        src.phi_jet(1.0, 1.05)
    with pytest.raises(DomainError):
        src.phi_jet(-1.0, 0.0)


def test_logderiv_source_matches_closed_form():
    # sanity model: phi = r*exp(s) has ell = 1, m = 1/r, phi(2,0) = 2
    src = LogDerivSource(
        ell_fn=lambda r, s, a, b: _const_jet(1.0, r, s, a, b),
        em_fn=lambda r, s, a, b: _inv_r_jet(r, s, a, b),
        anchor_r=2.0, anchor_phi=2.0)
    for r0, s0 in [(2.0, 0.0), (1.3, 0.4), (0.7, -0.2)]:
        assert src.phi_value(r0, s0) == pytest.approx(r0 * math.exp(s0), rel=1e-11)
        j = src.phi_jet(r0, s0)
        assert j.deriv(0, 3) == pytest.approx(r0 * math.exp(s0), rel=1e-11)
        assert j.deriv(1, 2) == pytest.approx(math.exp(s0), rel=1e-11)
    assert src.mixed_partial_residual(1.3, 0.4) == 0.0


def _const_jet(v, r, s, a, b):
    from finslerlab.jets import jet_constant
    return jet_constant(v, r, s, a, b)


def _inv_r_jet(r, s, a, b):
    from finslerlab.expressions import eval_jet
    return eval_jet(parse("1/r"), r, s, a, b)


def test_example1_source_jets_match_fd():
    src = source_for(builtin("example1"))
    assert isinstance(src, LogDerivSource)
    # keep fd stencils well inside the cone: quadrature to points hugging
    # the pole cannot converge
    inset = lambda r, s: 0.9 * src.tau_lo * r < s < 0.9 * src.tau_hi * r
    pts = [(1.0, 0.1), (1.4, -0.5)]
    orders = [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 0), (1, 1), (1, 2), (1, 3)]
    for r0, s0 in pts:
        j = src.phi_jet(r0, s0)
        assert j.value == pytest.approx(src.phi_value(r0, s0), rel=1e-12)
        for a, b in orders:
            ref = fd_oracle(lambda r, s: src.phi_value(r, s), r0, s0, a, b,
                            domain=inset)
            got = j.deriv(a, b)
            tol = 2e-5 if (a + b) <= 3 else 2e-3
            assert abs(got - ref) <= tol * (1 + abs(got)), (a, b)


def test_example1_anchor_and_cone():
    src = source_for(builtin("example1"))
    assert src.phi_value(1.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        src.phi_jet(1.0, 0.46)  # beyond tau_hi = 1/sqrt(5)
    with pytest.raises(DomainError):
        src.phi_jet(1.0, -0.72)  # beyond tau_lo = -1/sqrt(2)


def test_example1_against_cross_check_expression():
    m = builtin("example1")
    src = source_for(m)
    from finslerlab.expressions import eval_jet
    for r0, s0 in [(1.0, 0.2), (1.2, -0.4), (0.9, 0.35)]:
        direct = eval_jet(m.cross_check, r0, s0, 0, 0).value
        assert src.phi_value(r0, s0) == pytest.approx(direct, rel=1e-9)


def test_spine_cache_reused():
    src = source_for(builtin("example2"))
    v1 = src.phi_value(1.5, 0.1)
    assert 1.5 in src._spine
    v2 = src.phi_value(1.5, 0.1)
    assert v1 == v2
