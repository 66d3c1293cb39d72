import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bassnet.analytic import (
    TWO_NODE_SWITCH,
    BassParams,
    f_bass,
    f_one_d,
    f_two_node,
    half_life,
    half_life_bass,
    half_life_ratio_asymptotic,
    trivial_bounds,
)

# Frozen oracle values (computed once, independently of the code under test):
# scipy DOP853 on f' = (1-f)(p+qf), rtol 1e-13
F_BASS_P01_Q1_T10 = 0.15411722829867566
# expm of the 4-state two-node generator
F_TWO_P1_Q2_T1 = 0.7791165018946405
F_TWO_P1_Q1_T1 = 0.7293294335267753
# brentq on e^{-pT}(q e^{-pT} - p e^{-qT})/(q-p) = 1/2, p=0.01, q=1
T_HALF_TWO_LAM100 = 35.15987582067234

rates = st.floats(min_value=1e-3, max_value=10.0)


def test_bass_initial_and_external_limit():
    assert f_bass(0.0, 0.01, 0.1) == 0.0
    t = np.linspace(0, 50, 11)
    np.testing.assert_allclose(f_bass(t, 0.3, 0.0), 1 - np.exp(-0.3 * t), atol=1e-15)


def test_bass_against_ode_oracle():
    assert f_bass(10.0, 0.01, 0.1) == pytest.approx(F_BASS_P01_Q1_T10, abs=1e-12)


def test_bass_negative_time():
    with pytest.raises(ValueError):
        f_bass(-1.0, 0.01, 0.1)


def test_bass_satisfies_ode_residually():
    p, q, h = 0.01, 0.1, 1e-5
    t = np.linspace(1e-3, 10 / (p + q), 200)
    deriv = (f_bass(t + h, p, q) - f_bass(t - h, p, q)) / (2 * h)
    f = f_bass(t, p, q)
    assert np.max(np.abs(deriv - (1 - f) * (p + q * f))) <= 1e-6


def test_two_node_values():
    assert f_two_node(0.0, 1, 2) == 0.0
    assert f_two_node(1.0, 1, 2) == pytest.approx(F_TWO_P1_Q2_T1, abs=1e-12)
    assert f_two_node(1.0, 1, 2) == pytest.approx(1 - (2 * math.exp(-2) - math.exp(-3)), abs=1e-14)
    assert f_two_node(1.0, 1, 1) == pytest.approx(F_TWO_P1_Q1_T1, abs=1e-12)


def test_two_node_limit_branch_is_continuous():
    p = 0.7
    t = np.linspace(0, 20, 101)
    at_switch = f_two_node(t, p, p * (1 + TWO_NODE_SWITCH))
    just_outside = f_two_node(t, p, p * (1 + 1.01 * TWO_NODE_SWITCH))
    limit = f_two_node(t, p, p)
    np.testing.assert_allclose(at_switch, limit, atol=1e-9)
    np.testing.assert_allclose(just_outside, limit, atol=1e-7)
    # a step away from the switch the quotient is still well conditioned
    np.testing.assert_allclose(f_two_node(t, p, p * (1 + 1e-5)), limit, atol=1e-4)


def test_one_d():
    assert f_one_d(0.0, 0.01, 0.1) == 0.0
    t = np.linspace(0, 40, 9)
    np.testing.assert_allclose(f_one_d(t, 0.05, 0.0), 1 - np.exp(-0.05 * t), atol=1e-15)
    expected = 1 - math.exp(-0.11 * 10 + 0.1 * (1 - math.exp(-0.1)) / 0.01)
    assert f_one_d(10.0, 0.01, 0.1) == pytest.approx(expected, abs=1e-14)
    assert f_one_d(10.0, 0.01, 0.1) == pytest.approx(0.13791, abs=5e-5)


def test_trivial_bounds():
    assert trivial_bounds(0.0, 0.01, 0.1) == (0.0, 0.0)
    lo, hi = trivial_bounds(10.0, 0.01, 0.1)
    assert lo == pytest.approx(0.09516258196404048, abs=1e-15)
    assert hi == pytest.approx(0.6671289163019205, abs=1e-15)
    lo, hi = trivial_bounds(3.0, 0.2, 0.0)
    assert lo == hi


@settings(max_examples=60, deadline=None)
@given(p=rates, q=rates)
def test_bound_chain(p, q):
    t = np.linspace(0, 10 / (p + q), 1000)
    lo, hi = trivial_bounds(t, p, q)
    two = f_two_node(t, p, q)
    bass = f_bass(t, p, q)
    slack = 1e-12
    assert np.all(lo <= two + slack)
    assert np.all(two <= bass + slack)
    assert np.all(bass <= hi + slack)
    for curve in (two, bass, f_one_d(t, p, q)):
        assert np.all(np.diff(curve) >= -1e-15)


@settings(max_examples=40, deadline=None)
@given(p=rates, q=rates, c=st.sampled_from([0.1, 10.0]))
def test_dimensionless_collapse(p, q, c):
    t = np.linspace(0, 10 / (p + q), 50)
    bp = BassParams(p, q)
    np.testing.assert_allclose(f_bass(c * t, bp.scaled(c)), f_bass(t, bp), atol=1e-12)
    np.testing.assert_allclose(f_two_node(c * t, bp.scaled(c)), f_two_node(t, bp), atol=1e-12)


def test_half_life_closed_forms():
    p = 0.02
    res = half_life(lambda t: f_bass(t, p, p), 1.0)
    assert res.t_half == pytest.approx(math.log(3) / (2 * p), rel=1e-9)
    assert abs(f_bass(res.t_half, p, p) - 0.5) <= 1e-10
    assert res.t_half == pytest.approx(half_life_bass(p, p), rel=1e-9)
    res = half_life(lambda t: 1 - math.exp(-p * t), 0.001)
    assert res.t_half == pytest.approx(math.log(2) / p, rel=1e-9)


def test_half_life_two_node_lambda_100():
    res = half_life(lambda t: f_two_node(t, 0.01, 1.0), 1 / 1.01)
    assert res.t_half == pytest.approx(T_HALF_TWO_LAM100, abs=1e-7)
    assert res.t_half == pytest.approx(35.16, abs=5e-3)
    assert res.residual <= 1e-10


def test_half_life_never_reaching_half():
    with pytest.raises(RuntimeError):
        half_life(lambda t: 0.4 * (1 - math.exp(-t)), 1.0, max_doublings=50)


def test_asymptotic_ratio():
    assert half_life_ratio_asymptotic(math.e) == pytest.approx(2 / math.log(2) / math.e, rel=1e-14)
    assert half_life_ratio_asymptotic(math.e) == pytest.approx(1.0615, abs=1e-4)
    assert half_life_ratio_asymptotic(100) == pytest.approx(0.13287, abs=1e-5)
    for bad in (1.0, 0.5):
        with pytest.raises(ValueError):
            half_life_ratio_asymptotic(bad)


def test_exact_ratio_tends_to_asymptote():
    def dev(lam):
        p = 0.01
        up = half_life(lambda t: f_bass(t, p, lam * p), 1.0).t_half
        lo = half_life(lambda t: f_two_node(t, p, lam * p), 1.0).t_half
        return abs(up / lo / half_life_ratio_asymptotic(lam) - 1)

    assert dev(1e4) < dev(1e2) < 0.05


def test_params_validation():
    with pytest.raises(ValueError):
        BassParams(0.0, 0.1)
    with pytest.raises(ValueError):
        BassParams(0.1, -1.0)
    assert BassParams(0.01, 1.0).lam == pytest.approx(100)
