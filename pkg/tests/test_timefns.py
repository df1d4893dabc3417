import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from mhdexact.errors import ConfigError, DomainViolation, OrderUnsupported, PoleProximity
from mhdexact.timefns import (Const, Integral, Poly, Quotient, TrigExp, bernoulli_alpha, beta_from_alpha,
                              cos, eval_profile, exp, integrate, mu_profile, parse_profile, sin, sqrt,
                              t_profile)

T = t_profile()
coef = st.floats(-2, 2, allow_nan=False)


def fd(p, t, h=1e-3):
    return (-p(t + 2 * h) + 8 * p(t + h) - 8 * p(t - h) + p(t - 2 * h)) / (12 * h)


def test_derivative_of_constant():
    assert eval_profile(Const(5.0), 3.0, 1) == 0.0


def test_exponential_second_derivative():
    assert eval_profile(TrigExp(1.0, 2.0), 0.0, 2) == pytest.approx(4.0, abs=1e-14)


def test_sum_derivative_matches_hand_value_and_fd():
    p = parse_profile("(sum (poly 0 0 1) (sin t))")
    assert eval_profile(p, math.pi, 1) == pytest.approx(2 * math.pi - 1, abs=1e-12)
    assert fd(p, math.pi) == pytest.approx(2 * math.pi - 1, abs=1e-9)


def test_integrate_examples():
    assert integrate(exp(T), 0, 1) == pytest.approx(math.e - 1, abs=1e-10)
    assert integrate(Const(0.0), -3, 7) == 0.0
    assert integrate(cos(T), 0, math.pi) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError):
        integrate(T, 0, 1, tol=1e-14)


def test_integral_profile_derivatives():
    I = Integral(cos(T) * T)
    ts = np.linspace(0, 2, 7)
    # int_0^t s cos s ds = t sin t + cos t - 1
    assert np.allclose(I(ts), ts * np.sin(ts) + np.cos(ts) - 1, atol=1e-10)
    assert np.allclose(I(ts, 1), ts * np.cos(ts), atol=1e-12)
    assert np.allclose(I(ts, 2), np.cos(ts) - ts * np.sin(ts), atol=1e-12)
    with pytest.raises(OrderUnsupported):
        eval_profile(I, 0.5, 3)


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=1, max_size=6), st.floats(-1.5, 1.5), st.integers(0, 4))
def test_poly_matches_numpy(cs, t, order):
    expected = P.polyval(t, P.polyder(cs, order)) if order else P.polyval(t, cs)
    assert Poly(cs)(t, order) == pytest.approx(expected, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(coef, coef, st.floats(0.1, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_composite_derivative_matches_fd(a, b, w, ph, t):
    p = exp(TrigExp(a, 0.0, w, ph) * 0.5) * sin(T * b) + sqrt(T * T + 1.0)
    assert p(t, 1) == pytest.approx(fd(p, t), abs=1e-7)
    assert p(t, 2) == pytest.approx(fd(p.d(), t), abs=1e-7)


def test_jet_orders_up_to_cap():
    p = TrigExp(1.0, 0.0, 1.0)           # cos t
    for k in range(9):
        assert p(0.3, k) == pytest.approx(math.cos(0.3 + k * math.pi / 2), abs=1e-12)
    with pytest.raises(OrderUnsupported):
        eval_profile(p, 0.3, 9)
    with pytest.raises(OrderUnsupported):
        eval_profile(p, 0.3, -1)


def test_quotient_pole_raises():
    q = Quotient(Const(1.0), T - 0.5)
    assert q(0.0) == pytest.approx(-2.0)
    with pytest.raises(PoleProximity):
        q(0.5)


def test_bernoulli_examples():
    al = bernoulli_alpha(1.0, 0.0)
    assert np.all(al(np.linspace(-1, 3, 9)) == -1.0)
    assert bernoulli_alpha(1.0, 1.0)(0.0) == pytest.approx(3.0, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2).filter(lambda k: abs(k) > 1e-3), st.floats(-1, 1))
def test_bernoulli_ode(k, l):
    al = bernoulli_alpha(k, l)
    for t in np.linspace(-0.5, 1.5, 9):
        try:
            a = al(t)
        except PoleProximity:
            continue
        if abs(a) > 1e3:
            continue
        assert al(t, 1) == pytest.approx((a * a - k * k) / 2, abs=1e-8 * (1 + a * a))


def test_beta_constant_alpha():
    b = beta_from_alpha(Const(math.pi / 2), d=2.0, d0=0.7)
    assert b(1.3) == 0.7
    with pytest.raises(DomainViolation):
        beta_from_alpha(Const(0.1), d=2.0, d0=0.0)
    with pytest.raises(DomainViolation):
        beta_from_alpha(T, d=1.0, d0=0.0)


def test_beta_large_d_asymptotics():
    d = 1e6
    al = Poly([math.pi / 2, 0.1])
    b = beta_from_alpha(al, d=d, d0=0.0)
    for t in (0.0, 0.5, 1.0):
        expected = 0.1 / math.sin(al(t)) ** 2 / math.sqrt(d)
        assert b(t, 1) == pytest.approx(expected, rel=1e-2)
    neg = beta_from_alpha(al, d=d, d0=0.0, sign=-1)
    assert neg(0.8) == pytest.approx(-b(0.8), abs=1e-12)


@pytest.mark.parametrize("printed", [False, True])
def test_mu_identity(printed):
    k, l1, l2 = 0.8, 1.3, -0.4
    mu = mu_profile(k, l1, l2, as_printed=printed)
    ts = np.linspace(0, 1.5, 11)
    den = -1 + 2 * l2 * np.exp(-k * ts)
    num = 4.0 if printed else 4.0 * k
    assert np.allclose(mu(ts, 1) / mu(ts), 2 * k + num / den, atol=1e-10)
    assert mu(0.0) == pytest.approx(l1)


def test_grammar_round_trip():
    text = "(sum (prod (poly 1 2) (trigexp 0.5 -1 2 0.3 sin)) (quot (exp t) (poly 2 0 1)) (int (cos t)))"
    p = parse_profile(text)
    q = parse_profile(p.to_expr())
    ts = np.linspace(-0.5, 1.5, 13)
    assert np.allclose(p(ts), q(ts), atol=1e-12)
    assert np.allclose(p(ts, 1), q(ts, 1), atol=1e-12)


@pytest.mark.parametrize("bad", ["", "(poly", "(foo 1)", "(poly x)", "(trigexp 1 2)", "t t", ")"])
def test_grammar_errors(bad):
    with pytest.raises(ConfigError):
        parse_profile(bad)
