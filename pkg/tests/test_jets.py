"""Jet arithmetic against hand-computed derivatives and the FD oracle."""

import math

import numpy as np
import pytest

from finslerlab.jets import (
    DivisionByZeroJet,
    DomainError,
    Jet,
    StencilOutOfDomain,
    fd_oracle,
    jet_apply,
    jet_constant,
    jet_seed_r,
    jet_seed_s,
)


def random_jet(rng, r0=1.1, s0=0.3, scale=1.0):
    c = rng.uniform(-scale, scale, size=(2, 6))
    return Jet(c, r0, s0)


# -- the oracle itself, checked against exact formulas ------------------------


def test_fd_oracle_polynomial_exact():
    # s^3: third s-derivative is 6 everywhere, stencils are exact on cubics.
    f = lambda r, s: s ** 3
    assert fd_oracle(f, 1.0, 0.3, 0, 3) == pytest.approx(6.0, abs=1e-6)
    assert fd_oracle(f, 1.0, 0.3, 0, 1) == pytest.approx(3 * 0.3 ** 2, abs=1e-9)
    assert fd_oracle(f, 1.0, 0.3, 1, 2) == pytest.approx(0.0, abs=1e-7)


def test_fd_oracle_mixed_product():
    # f = r^2 * s^4: d_r d_s^3 f = 2r * 24 s
    f = lambda r, s: r ** 2 * s ** 4
    got = fd_oracle(f, 1.5, 0.4, 1, 3)
    assert got == pytest.approx(2 * 1.5 * 24 * 0.4, rel=1e-6)


def test_fd_oracle_exp():
    f = lambda r, s: math.exp(r + 0.5 * s)
    base = math.exp(1.0 + 0.5 * 0.2)
    for (a, b), tol in [((0, 1), 1e-8), ((1, 2), 1e-6), ((0, 4), 1e-4), ((0, 5), 1e-3)]:
        exact = 0.5 ** b * base
        assert fd_oracle(f, 1.0, 0.2, a, b) == pytest.approx(exact, rel=tol)


def test_fd_oracle_domain_guard():
    f = lambda r, s: math.sqrt(r ** 2 - s ** 2)
    # Right on the boundary no stencil fits, however far the ladder shrinks.
    with pytest.raises(StencilOutOfDomain):
        fd_oracle(f, 1.0, 0.5, 0, 2, domain=lambda r, s: abs(s) < 0.5)


def test_fd_oracle_shrinks_into_thin_domain():
    # Near the boundary the ladder shrinks until the stencil fits.
    f = lambda r, s: s ** 2
    got = fd_oracle(f, 1.0, 0.49, 0, 1, domain=lambda r, s: abs(s) < 0.5)
    assert got == pytest.approx(2 * 0.49, rel=1e-7)


# -- seeds and ring axioms -----------------------------------------------------


def test_seeds():
    r = jet_seed_r(2.0, 0.5)
    s = jet_seed_s(2.0, 0.5)
    assert r.value == 2.0 and r.deriv(1, 0) == 1.0 and r.deriv(0, 1) == 0.0
    assert s.value == 0.5 and s.deriv(0, 1) == 1.0 and s.deriv(1, 0) == 0.0
    c = jet_constant(7.0, 2.0, 0.5)
    assert c.value == 7.0 and np.count_nonzero(c.c) == 1


def test_product_leibniz_coefficient():
    # (fg)_rs = f_rs g + f_r g_s + f_s g_r + f g_rs
    rng = np.random.default_rng(7)
    for _ in range(50):
        f, g = random_jet(rng), random_jet(rng)
        p = f * g
        expect = (
            f.deriv(1, 1) * g.value
            + f.deriv(1, 0) * g.deriv(0, 1)
            + f.deriv(0, 1) * g.deriv(1, 0)
            + f.value * g.deriv(1, 1)
        )
        assert p.deriv(1, 1) == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_mul_matches_polynomial_model():
    # Multiply two explicit polynomials and compare every stored partial
    # against the closed-form derivatives of the product.
    r0, s0 = 1.3, -0.4

    def poly_jet(coeffs):
        # coeffs[a][b] multiplies r^a s^b in the polynomial
        r, s = jet_seed_r(r0, s0), jet_seed_s(r0, s0)
        acc = jet_constant(0.0, r0, s0)
        for a, row in enumerate(coeffs):
            for b, v in enumerate(row):
                term = jet_constant(v, r0, s0)
                for _ in range(a):
                    term = term * r
                for _ in range(b):
                    term = term * s
                acc = acc + term
        return acc

    f = poly_jet([[1.0, -2.0, 0.5], [0.0, 3.0, 1.0]])
    g = poly_jet([[2.0, 1.0], [1.0, -1.0]])
    p = f * g

    def fval(r, s):
        return (1 - 2 * s + 0.5 * s ** 2 + 3 * r * s + r * s ** 2) * (
            2 + s + r - r * s
        )

    for a in range(2):
        for b in range(6):
            tol = 1e-5 if b <= 3 else 1e-3
            got = p.deriv(a, b)
            ref = fd_oracle(fval, r0, s0, a, b)
            assert abs(got - ref) <= tol * (1.0 + abs(got)), (a, b, got, ref)


def test_division_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(50):
        f, g = random_jet(rng), random_jet(rng)
        g.c[0, 0] = 2.0 + abs(g.c[0, 0])
        h = f / g
        back = h * g
        np.testing.assert_allclose(back.c, f.c, rtol=1e-12, atol=1e-12)


def test_division_guard():
    f = jet_constant(1.0, 1.0, 0.0)
    g = jet_seed_s(1.0, 0.0)  # value 0 at base point
    with pytest.raises(DivisionByZeroJet):
        f / g


def test_base_point_mismatch_rejected():
    a = jet_constant(1.0, 1.0, 0.0)
    b = jet_constant(1.0, 2.0, 0.0)
    with pytest.raises(ValueError):
        a + b


# -- elementary compositions ---------------------------------------------------


def test_sqrt_of_r2_minus_s2():
    # w = sqrt(r^2 - s^2) at (1, 0): w = 1, w_s = 0, w_ss = -1, w_r = 1
    r, s = jet_seed_r(1.0, 0.0), jet_seed_s(1.0, 0.0)
    w = jet_apply("sqrt", r * r - s * s)
    assert w.value == pytest.approx(1.0, abs=1e-14)
    assert w.deriv(0, 1) == pytest.approx(0.0, abs=1e-14)
    assert w.deriv(0, 2) == pytest.approx(-1.0, abs=1e-13)
    assert w.deriv(1, 0) == pytest.approx(1.0, abs=1e-13)


def test_exp_ln_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(30):
        f = random_jet(rng)
        f.c[0, 0] = 1.5 + abs(f.c[0, 0])
        back = jet_apply("exp", jet_apply("ln_abs", f))
        np.testing.assert_allclose(back.c, f.c, rtol=1e-12, atol=1e-12)


def test_arctanh_re_value_both_branches():
    # Direct formula 0.5*ln|(1+x)/(1-x)| at an argument beyond 1.
    x = math.sqrt(5) / 2
    j = jet_constant(x, 1.0, 0.0)
    got = jet_apply("arctanh_re", j)
    assert got.value == pytest.approx(0.5 * math.log(abs((1 + x) / (1 - x))), rel=1e-14)
    # Odd function on the inner branch too.
    k = jet_constant(-0.4, 1.0, 0.0)
    inner = jet_apply("arctanh_re", k)
    assert inner.value == pytest.approx(-math.atanh(0.4), rel=1e-13)


def test_arctanh_re_derivative_is_geometric():
    # d/dx arctanh_re = 1/(1-x^2) on either branch; check via an s-seed.
    for x0 in (0.3, 1.7):
        s = jet_seed_s(1.0, x0)
        a = jet_apply("arctanh_re", s)
        assert a.deriv(0, 1) == pytest.approx(1.0 / (1.0 - x0 ** 2), rel=1e-12)


def test_pow_integer_negative_base():
    s = jet_seed_s(1.0, -2.0)
    p = jet_apply("pow", s, exponent=3.0)
    assert p.value == pytest.approx(-8.0)
    assert p.deriv(0, 1) == pytest.approx(12.0)
    assert p.deriv(0, 3) == pytest.approx(6.0)


def test_pow_fractional_negative_base_rejected():
    s = jet_seed_s(1.0, -2.0)
    with pytest.raises(DomainError):
        jet_apply("pow", s, exponent=0.5)


def test_domain_errors():
    z = jet_constant(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        jet_apply("sqrt", z)
    with pytest.raises(DomainError):
        jet_apply("ln_abs", z)
    with pytest.raises(DomainError):
        jet_apply("abs", z)
    one = jet_constant(1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        jet_apply("arctanh_re", one)


def test_abs_sign_propagation():
    rng = np.random.default_rng(5)
    f = random_jet(rng)
    f.c[0, 0] = -2.0
    a = jet_apply("abs", f)
    np.testing.assert_allclose(a.c, -f.c)


# -- jets vs oracle on transcendental compositions ------------------------------


def composed(r, s):
    return math.exp(0.3 * s) * math.sqrt(r ** 2 + 1) / (2 + r + 0.5 * s)


def composed_jet(r0, s0):
    r, s = jet_seed_r(r0, s0), jet_seed_s(r0, s0)
    return (
        jet_apply("exp", 0.3 * s)
        * jet_apply("sqrt", r * r + 1)
        / (2 + r + 0.5 * s)
    )


def test_jet_matches_oracle_graded():
    rng = np.random.default_rng(19)
    for _ in range(10):
        r0 = rng.uniform(0.6, 1.8)
        s0 = rng.uniform(-0.5, 0.5)
        jet = composed_jet(r0, s0)
        for a in range(2):
            for b in range(6):
                tol = 1e-5 if b <= 3 else 1e-3
                got = jet.deriv(a, b)
                ref = fd_oracle(composed, r0, s0, a, b)
                assert abs(got - ref) <= tol * (1.0 + abs(got)), (a, b, got, ref)
