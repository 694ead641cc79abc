import math
import random

import numpy as np
import pytest

from finslerlab.expressions import (
    BinOp,
    Call,
    MissingParameter,
    Neg,
    Num,
    ParseError,
    UnknownBuiltin,
    Var,
    builtin,
    builtin_names,
    eval_jet,
    expr_variables,
    parse,
    print_expr,
)
from finslerlab.jets import DomainError, fd_oracle


def val(text, r0=1.3, s0=0.4):
    return eval_jet(parse(text), r0, s0).value


def test_precedence():
    assert val("1+2*3^2") == 19.0
    assert val("2^3^2") == 512.0
    assert val("-2^2") == -4.0
    assert val("(1+2)*3") == 9.0
    assert val("2^-1") == 0.5
    assert val("6/3/2") == 1.0
    assert val("1-2-3") == -4.0
    assert val("--4") == 4.0


def test_no_implicit_multiplication():
    with pytest.raises(ParseError) as exc:
        parse("2r")
    assert exc.value.position == 1
    with pytest.raises(ParseError):
        parse("2 s")
    with pytest.raises(ParseError):
        parse("r s")


@pytest.mark.parametrize("bad", [
    "", "sqrt(", "(1+2", "foo(1)", "pow(2)", "sqrt(1, 2)", "1+", "*3",
    "1..2", "r^", "exp()", "2,3",
])
def test_parse_errors_carry_position(bad):
    with pytest.raises(ParseError) as exc:
        parse(bad)
    assert isinstance(exc.value.position, int)
    assert 0 <= exc.value.position <= len(bad)


ROUNDTRIP_CORPUS = [
    "1+2*3",
    "(1+2)*3",
    "-r^2",
    "(-r)^2",
    "2^-s",
    "r - (s - 1)",
    "r/(s*s)",
    "sqrt(r^2 - s^2)",
    "pow(abs(5*s^2 - r^2), 0.5)",
    "exp(2*s/sqrt(r^2 - s^2))/r^5",
    "arctanh_re((s + sqrt(5)*r)/(2*sqrt(r^2 - s^2)))",
    "1e-3 + 2.5E2*s",
]


@pytest.mark.parametrize("text", ROUNDTRIP_CORPUS)
def test_print_parse_roundtrip(text):
    tree = parse(text)
    assert parse(print_expr(tree)) == tree


def _random_expr(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        pick = rng.random()
        if pick < 0.4:
            return Num(float(rng.choice([0.0, 1.0, 2.0, 0.5, 3.25, 10.0])))
        return Var(rng.choice(["r", "s"]))
    pick = rng.random()
    if pick < 0.15:
        return Neg(_random_expr(rng, depth - 1))
    if pick < 0.75:
        op = rng.choice(["+", "-", "*", "/", "^"])
        return BinOp(op, _random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    fn = rng.choice(["sqrt", "exp", "ln_abs", "arctanh_re", "abs"])
    return Call(fn, (_random_expr(rng, depth - 1),))


def test_roundtrip_fuzz():
    rng = random.Random(20240817)
    for _ in range(400):
        tree = _random_expr(rng, 4)
        assert parse(print_expr(tree)) == tree


def test_eval_exact_polynomial():
    j = eval_jet(parse("r^2*s^3"), 1.7, 0.6)
    assert j.deriv(0, 0) == pytest.approx(1.7**2 * 0.6**3, rel=1e-14)
    assert j.deriv(1, 2) == pytest.approx(2 * 1.7 * 6 * 0.6, rel=1e-13)
    assert j.deriv(0, 3) == pytest.approx(6 * 1.7**2, rel=1e-13)
    assert j.deriv(1, 4) == 0.0


def test_eval_matches_fd_oracle():
    texts = [
        "sqrt(r^2 - s^2)",
        "exp(2*s/sqrt(r^2 - s^2))/r^5",
        "ln_abs(r + s^2)/(2 + s)",
        "pow(r^2 + s^2, -1.5)",
    ]
    rng = np.random.default_rng(7)
    for text in texts:
        tree = parse(text)
        for _ in range(4):
            r0 = float(rng.uniform(0.8, 1.6))
            s0 = float(rng.uniform(-0.4, 0.4))
            j = eval_jet(tree, r0, s0)
            f = lambda r, s: eval_jet(tree, r, s, 0, 0).value
            for a in (0, 1):
                for b in range(6):
                    if a == 0 and b == 0:
                        continue
                    ref = fd_oracle(f, r0, s0, a, b)
                    got = j.deriv(a, b)
                    tol = 1e-5 if (a + b) <= 3 else 1e-3
                    assert abs(got - ref) <= tol * (1 + abs(got)), (text, a, b)


def test_eval_scalar_matches_eval_jet():
    import random

    from finslerlab.expressions import eval_scalar

    rng = random.Random(99)
    texts = ROUNDTRIP_CORPUS + ["abs(5*s^2 - r^2)^(1/3)", "pow(r, -2)"]
    for text in texts:
        tree = parse(text)
        for _ in range(6):
            r0 = rng.uniform(0.6, 1.8)
            s0 = rng.uniform(-0.5, 0.5)
            try:
                ref = eval_jet(tree, r0, s0, 0, 0).value
            except DomainError:
                continue
            assert eval_scalar(tree, r0, s0) == pytest.approx(ref, rel=1e-14)


def test_nonconstant_exponent():
    j = eval_jet(parse("r^s"), 2.0, 0.3)
    assert j.value == pytest.approx(2.0**0.3, rel=1e-14)
    assert j.deriv(0, 1) == pytest.approx(math.log(2.0) * 2.0**0.3, rel=1e-12)
    with pytest.raises(DomainError):
        eval_jet(parse("(-2)^s"), 1.0, 0.3)
    with pytest.raises(DomainError):
        eval_jet(parse("pow(r, s)"), 2.0, 0.3)


def test_expr_variables():
    assert expr_variables(parse("sqrt(r^2 - s^2) + 1")) == {"r", "s"}
    assert expr_variables(parse("2.5")) == set()


def test_builtin_registry_names():
    assert set(builtin_names()) == {
        "euclidean", "riemann_quadratic", "example1", "example2",
        "zhou2d_r5", "zhou2d_r6",
    }
    with pytest.raises(UnknownBuiltin):
        builtin("nope")


def test_euclidean():
    m = builtin("euclidean")
    j = eval_jet(m.expr, 1.1, -0.2)
    assert j.value == 1.0
    assert np.count_nonzero(j.c) == 1


def test_riemann_quadratic_params():
    with pytest.raises(MissingParameter):
        builtin("riemann_quadratic")
    with pytest.raises(MissingParameter):
        builtin("riemann_quadratic", {"f1": "1"})
    with pytest.raises(MissingParameter):
        builtin("riemann_quadratic", {"f1": "1", "f2": "1", "f3": "1"})
    with pytest.raises(MissingParameter):
        builtin("riemann_quadratic", {"f1": "s", "f2": "1"})
    with pytest.raises(MissingParameter):
        builtin("euclidean", {"f1": "1"})

    m = builtin("riemann_quadratic", {"f1": 1, "f2": 1})
    j = eval_jet(m.expr, 1.3, 0.4)
    assert j.value == pytest.approx(math.sqrt(1.16), rel=1e-14)
    assert j.deriv(0, 2) == pytest.approx((1 + 0.4**2) ** -1.5, rel=1e-12)
    assert j.deriv(1, 0) == 0.0

    m2 = builtin("riemann_quadratic", {"f1": "exp(2*r)", "f2": "r^2"})
    j2 = eval_jet(m2.expr, 0.9, 0.1)
    ref = math.sqrt(math.exp(1.8) + 0.81 * 0.01)
    assert j2.value == pytest.approx(ref, rel=1e-13)


def test_zhou_closed_forms():
    for name, n in (("zhou2d_r5", 5), ("zhou2d_r6", 6)):
        m = builtin(name)
        r0, s0 = 1.2, 0.3
        w = math.sqrt(r0**2 - s0**2)
        ref = r0**-n * w * math.exp(2 * s0 / w)
        assert eval_jet(m.expr, r0, s0).value == pytest.approx(ref, rel=1e-13)


def test_log_derivative_values_at_axis():
    m1 = builtin("example1")
    assert eval_jet(m1.ell, 1.0, 0.0).value == pytest.approx(-1.0, abs=1e-15)
    assert eval_jet(m1.em, 1.0, 0.0).value == pytest.approx(1.0, abs=1e-15)
    m2 = builtin("example2")
    assert eval_jet(m2.ell, 1.0, 0.0).value == pytest.approx(-1.0, abs=1e-15)
    assert eval_jet(m2.em, 1.0, 0.0).value == pytest.approx(0.0, abs=1e-15)


def test_example1_cross_check_consistency():
    # The explicit integral must reproduce the rational log-derivatives.
    m = builtin("example1")
    pts = [(1.0, 0.1), (1.0, -0.3), (1.3, 0.4), (0.8, -0.45), (1.0, 0.55)]
    for r0, s0 in pts:
        phi = eval_jet(m.cross_check, r0, s0)
        ell = eval_jet(m.ell, r0, s0).value
        em = eval_jet(m.em, r0, s0).value
        assert phi.deriv(0, 1) / phi.value == pytest.approx(ell, rel=1e-9, abs=1e-9)
        assert phi.deriv(1, 0) / phi.value == pytest.approx(em, rel=1e-9, abs=1e-9)


def test_example1_cross_check_anchor():
    m = builtin("example1")
    assert eval_jet(m.cross_check, 1.0, 0.0).value == pytest.approx(1.0, abs=1e-12)


def test_builtin_cones_bracket_denominator_zeros():
    m1 = builtin("example1")
    assert m1.tau_lo == pytest.approx(-1 / math.sqrt(2))
    assert m1.tau_hi == pytest.approx(1 / math.sqrt(5))
    den = parse("-r^2 + 3*s^2 + s*sqrt(r^2 - s^2)")
    for tau in (m1.tau_lo, m1.tau_hi):
        assert abs(eval_jet(den, 1.0, tau, 0, 0).value) < 1e-12
    m2 = builtin("example2")
    den2 = parse("-r^2 + 2*s^2 + s*sqrt(r^2 - s^2)")
    for tau in (m2.tau_lo, m2.tau_hi):
        assert abs(eval_jet(den2, 1.0, tau, 0, 0).value) < 1e-12
