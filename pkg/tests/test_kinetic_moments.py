import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from consensus_kinetics.errors import InvalidParameter, PathTooShort
from consensus_kinetics.kinetic.moments import (
    gamma_coefficient,
    interaction_rule,
    sentiment_closed_form,
    sentiment_rk4,
    variance_rhs,
    variance_solve,
)
from consensus_kinetics.kinetic.params import KineticParams, load_params, save_params
from consensus_kinetics.kinetic.paths import ForcingPath, _phi, propagate_linear
from consensus_kinetics.timeseries import synth_gbm

REF = KineticParams.reference()
T_FINE = np.arange(5041) / 2520.0


def sinusoid(t_end=2.0, n=505):
    t = np.linspace(0.0, t_end, n)
    return ForcingPath(t, 2000.0 + 150.0 * np.sin(2 * np.pi * t) + 50.0 * np.cos(7 * t))


# -- parameters ---------------------------------------------------------------


@pytest.mark.parametrize(
    "kw", [dict(q=0.0), dict(q=1.0), dict(beta=0.0), dict(alpha=-0.1), dict(delta=-1.0), dict(q=float("nan"))]
)
def test_params_validation(kw):
    base = dict(q=0.3, beta=2.0, delta=0.1, alpha=0.0)
    with pytest.raises(InvalidParameter):
        KineticParams(**{**base, **kw})


def test_params_round_trip_and_nested_load(tmp_path):
    p = KineticParams(0.3, 2.5, 0.1, 0.7)
    path = save_params(tmp_path / "p.json", p)
    assert load_params(path) == (p, 1 / 252)
    nested = tmp_path / "c.json"
    nested.write_text(json.dumps({"params": {"q": 0.28, "beta": 6.05, "delta": 0.143, "k": 1.694}}))
    assert load_params(nested)[0] == KineticParams.reference()
    assert math.isclose(REF.k, 0.28 * 6.05)


# -- interaction rule ---------------------------------------------------------


def test_interaction_rule_examples():
    assert interaction_rule(2000 * 1.143, 2000.0, REF) == pytest.approx(2000 * 1.143, rel=1e-15)
    assert interaction_rule(0.0, 100.0, KineticParams(0.5, 1.0, 0.0)) == 50.0
    assert interaction_rule(2000.0, 2000.0, REF) == pytest.approx(2080.08, abs=1e-9)
    with pytest.raises(InvalidParameter):
        interaction_rule(-1.0, 100.0, REF)
    with pytest.raises(InvalidParameter):
        interaction_rule(1.0, 0.0, REF)


@given(st.floats(0, 1e5), st.floats(1e-3, 1e5), st.floats(0.01, 0.99), st.floats(-0.5, 1.0))
def test_interaction_rule_is_a_convex_combination(x, X, q, delta):
    p = KineticParams(q, 1.0, delta)
    xb = interaction_rule(x, X, p)
    lo, hi = sorted((x, X * (1 + delta)))
    assert lo - 1e-9 * hi <= xb <= hi + 1e-9 * hi


# -- propagators --------------------------------------------------------------


def test_phi_functions_match_mpmath():
    zs = np.array([-40.0, -3.0, -1.0, -0.999, -0.3, -1e-6, 0.0, 1e-6, 0.5, 0.999, 1.0, 4.0])
    got = _phi(zs, 3)
    for j in range(1, 4):
        for z, g in zip(zs, got[j - 1]):
            # phi_j(z) = sum z^m / (m+j)!
            ref = mpmath.nsum(lambda m: mpmath.mpf(z) ** m / mpmath.factorial(m + j), [0, mpmath.inf])
            assert g == pytest.approx(float(ref), rel=1e-14, abs=1e-300)


def test_propagate_linear_exact_for_linear_forcing():
    # y' = a y + (c0 + c1 t)
    a, c0, c1, y0 = -1.7, 3.0, 0.5, 2.0
    t = np.linspace(0, 2, 9)
    y = propagate_linear(a, c0 + c1 * t, t, y0)
    exact = (y0 + c0 / a + c1 / a**2) * np.exp(a * t) - c0 / a - c1 * t / a - c1 / a**2
    assert_allclose(y, exact, rtol=1e-13)
    # non-uniform grid takes the loop path
    tn = np.array([0.0, 0.1, 0.35, 0.4, 1.3, 2.0])
    yn = propagate_linear(a, c0 + c1 * tn, tn, y0)
    exact_n = (y0 + c0 / a + c1 / a**2) * np.exp(a * tn) - c0 / a - c1 * tn / a - c1 / a**2
    assert_allclose(yn, exact_n, rtol=1e-13)


# -- sentiment ------------------------------------------------------------------


def test_sentiment_fixed_point():
    X = ForcingPath.constant(1234.5, 2.0)
    p = KineticParams(0.4, 3.0, 0.0)
    assert_allclose(sentiment_closed_form(p, X, 1234.5, T_FINE).s_values, 1234.5, rtol=1e-13)
    assert np.all(sentiment_rk4(p, X, 1234.5, T_FINE[:200]).s_values == 1234.5)


def test_sentiment_half_relaxation():
    X = ForcingPath.constant(100.0, 1.0)
    p = KineticParams(0.5, 2.0, 0.0)
    s = sentiment_closed_form(p, X, 0.0, [0.0, math.log(2)])
    assert s.s_values[-1] == pytest.approx(50.0, rel=1e-14)


@given(
    s0=st.floats(100.0, 5000.0),
    X0=st.floats(100.0, 5000.0),
    k=st.floats(0.05, 10.0),
    delta=st.floats(-0.4, 0.8),
)
@settings(max_examples=50)
def test_constant_index_envelope_is_exact(s0, X0, k, delta):
    p = KineticParams(0.3, k / 0.3, delta)
    t = np.linspace(0, 3.0, 61)
    s = sentiment_closed_form(p, ForcingPath.constant(X0, 3.0), s0, t).s_values
    target = X0 * (1 + delta)
    gap = np.abs(s - target)
    assert_allclose(gap, abs(s0 - target) * np.exp(-p.k * t), rtol=1e-9, atol=1e-9 * target)
    # monotone approach
    assert np.all(np.diff(gap) <= 1e-9 * target)


def test_reference_steady_state():
    X = ForcingPath.constant(2000.0, 20.0)
    s = sentiment_closed_form(REF, X, 1500.0, [20.0]).s_values[-1]
    assert s == pytest.approx(2000 * 1.143, rel=1e-12)


@pytest.mark.parametrize("X", [sinusoid(), ForcingPath.from_series(synth_gbm(2000.0, 0.08, 0.2, 505, seed=11))])
def test_closed_form_matches_rk4(X):
    cf = sentiment_closed_form(REF, X, 2100.0, T_FINE).s_values
    rk = sentiment_rk4(REF, X, 2100.0, T_FINE).s_values
    assert np.max(np.abs(rk - cf) / cf) < 1e-6


def test_closed_form_matches_scipy_solver():
    from scipy.integrate import solve_ivp

    X = sinusoid()
    t = np.linspace(0, 2, 41)
    ref = solve_ivp(
        lambda tt, s: REF.k * (X(tt) * 1.143 - s), (0, 2), [1900.0], t_eval=t, rtol=1e-12, atol=1e-9,
        max_step=1 / 252,
    ).y[0]
    assert_allclose(sentiment_closed_form(REF, X, 1900.0, t).s_values, ref, rtol=1e-8)


def test_rk4_is_fourth_order():
    X = ForcingPath.constant(2000.0, 2.0)
    p = REF
    errs = []
    for dt in (0.2, 0.1, 0.05, 0.025):
        t = np.arange(int(round(2 / dt)) + 1) * dt
        exact = sentiment_closed_form(p, X, 1500.0, t).s_values
        errs.append(np.max(np.abs(sentiment_rk4(p, X, 1500.0, t).s_values - exact)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 13) & (ratios < 20))


def test_alpha_and_ridge_leave_sentiment_unchanged():
    X = sinusoid()
    base = sentiment_closed_form(REF, X, 2000.0, T_FINE).s_values
    assert np.array_equal(base, sentiment_closed_form(KineticParams.reference(alpha=3.0), X, 2000.0, T_FINE).s_values)
    other = KineticParams(0.5, REF.k / 0.5, REF.delta)
    assert_allclose(sentiment_closed_form(other, X, 2000.0, T_FINE).s_values, base, rtol=1e-13)


def test_piecewise_constant_interpolation():
    X = ForcingPath(np.array([0.0, 1.0, 2.0]), np.array([100.0, 200.0, 200.0]), "constant")
    p = KineticParams(0.5, 2.0, 0.0)
    s = sentiment_closed_form(p, X, 100.0, [0.0, 1.0, 1.5]).s_values
    assert s[1] == pytest.approx(100.0, rel=1e-14)
    assert s[2] == pytest.approx(200.0 - 100.0 * math.exp(-0.5), rel=1e-14)


def test_path_too_short():
    with pytest.raises(PathTooShort):
        sentiment_closed_form(REF, ForcingPath.constant(1.0, 1.0), 1.0, [0.0, 2.0])


# -- variance -------------------------------------------------------------------


def test_variance_rhs_examples():
    p = KineticParams.reference(alpha=0.4)
    Y = 2000 * 1.143
    assert variance_rhs(p, 0.0, Y, 2000.0, "corrected") == 0.0
    assert variance_rhs(KineticParams(0.5, 1.0, 0.0), 1.0, 0.0, 1e-300, "corrected") == pytest.approx(-0.75)
    assert gamma_coefficient(KineticParams(0.5, 2.0, 0.0, alpha=1.0), "paper")[0] == pytest.approx(0.5)
    # published-variant forcing at the degenerate point equals -2 beta q^2 s^2
    assert variance_rhs(p, 0.0, Y, 2000.0, "paper") == pytest.approx(-2 * p.beta * p.q**2 * Y**2, rel=1e-12)


def test_gamma_regimes():
    assert gamma_coefficient(KineticParams(0.5, 1.0, 0.0, alpha=2.0), "paper") == (3.25, "unstable")
    for alpha in (0.0, 1.0, 50.0):
        assert gamma_coefficient(KineticParams(0.3, 4.0, 0.0, alpha), "corrected")[1] == "stable"
    p0 = KineticParams(0.3, 4.0, 0.0)
    assert gamma_coefficient(p0, "paper") == gamma_coefficient(p0, "corrected")


def test_variance_pure_decay():
    p = KineticParams.reference(alpha=0.5)
    X = ForcingPath.constant(2000.0, 2.0)
    s = sentiment_closed_form(p, X, 2000 * 1.143, T_FINE)
    v = variance_solve(p, s, X, 100.0).v_values
    gamma, _ = gamma_coefficient(p)
    assert_allclose(v, 100.0 * np.exp(gamma * T_FINE), rtol=1e-12)


@pytest.mark.parametrize("variant", ["corrected", "paper"])
@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_variance_closed_form_matches_rk4(variant, alpha):
    p = KineticParams.reference(alpha=alpha)
    X = ForcingPath.from_series(synth_gbm(2000.0, 0.08, 0.2, 505, seed=2))
    s = sentiment_closed_form(p, X, 1800.0, T_FINE)
    cf = variance_solve(p, s, X, 40000.0, variant=variant).v_values
    rk = variance_solve(p, s, X, 40000.0, variant=variant, method="rk4").v_values
    assert np.max(np.abs(cf - rk)) / np.max(np.abs(rk)) < 1e-6


@given(V0=st.floats(0, 1e6), s0=st.floats(100, 5000), alpha=st.floats(0, 5))
@settings(max_examples=30, deadline=None)
def test_corrected_variance_is_nonnegative(V0, s0, alpha):
    p = KineticParams.reference(alpha=alpha)
    X = sinusoid()
    t = T_FINE[::10]
    v = variance_solve(p, sentiment_closed_form(p, X, s0, t), X, V0).v_values
    assert np.all(v >= -1e-12 * max(1.0, np.max(np.abs(v))))


def test_published_variant_goes_negative_from_degenerate_start():
    p = KineticParams.reference()
    X = ForcingPath.constant(2000.0, 1.0)
    Y = 2000 * 1.143
    t = np.arange(11) / 2520
    s = sentiment_closed_form(p, X, Y, t)
    v = variance_solve(p, s, X, 0.0, variant="paper", method="rk4").v_values
    assert v[1] < 0
    assert np.all(variance_solve(p, s, X, 0.0).v_values == 0.0)


def test_variance_input_checks():
    p = KineticParams.reference()
    X = ForcingPath.constant(2000.0, 1.0)
    s = sentiment_closed_form(p, X, 2000.0, [0.0, 0.5])
    with pytest.raises(InvalidParameter):
        variance_solve(p, s, X, -1.0)
    with pytest.raises(InvalidParameter):
        variance_solve(p, s, X, 1.0, variant="other")
    with pytest.raises(InvalidParameter):
        variance_solve(p, s, X, 1.0, t_grid=[0.0, 0.25, 0.5])
