import numpy as np
import pytest

from bassnet import analytic
from bassnet import network as nw
from bassnet.analytic import BassParams
from bassnet.bounds import (
    conjecture_experiment,
    gap_metrics,
    random_connected_homogeneous,
    strictness_margin,
    verify_bounds,
    verify_bounds_inhomogeneous,
)
from bassnet.curves import AdoptionCurve, EnsembleEstimate
from bassnet.exact import solve_master
from bassnet.network import NetworkSpec, check_homogeneity

P, Q = 0.01, 0.1
BP = BassParams(P, Q)


def test_exact_curve_passes():
    t = np.linspace(0, 10 / (P + Q), 41)
    rep = verify_bounds(solve_master(nw.circle(6, P, Q, sided=2), t), BP)
    assert rep.passed
    assert rep.summary()["violations_low"] == 0
    assert rep.node_margin_low.min() >= -1e-9


def test_bass_curve_itself_is_on_the_upper_bound():
    t = np.linspace(0, 100, 11)
    curve = AdoptionCurve(t=t, f=analytic.f_bass(t, BP), meta={"p": P, "q": Q})
    rep = verify_bounds(curve, BP)
    assert rep.passed
    assert abs(rep.worst_margin_high) < 1e-15


def test_violation_flagged():
    t = np.linspace(0, 100, 11)
    f = analytic.f_bass(t, BP)
    f[5] += 1e-6
    rep = verify_bounds(AdoptionCurve(t=t, f=f), BP)
    assert not rep.passed
    assert rep.violation_high.tolist() == [i == 5 for i in range(11)]


def test_mc_tolerates_up_to_one_percent():
    t = np.linspace(0, 100, 200)
    f = analytic.f_bass(t, BP).copy()
    se = np.full(t.size, 1e-4)
    f[10] += 1e-3  # 10 se above the ceiling
    est = EnsembleEstimate(t=t, f=f, se=se, runs=100)
    rep = verify_bounds(est, BP)
    assert rep.flagged_fraction == pytest.approx(0.005)
    assert rep.passed
    f[20] += 1e-3
    f[30] += 1e-3
    assert not verify_bounds(EnsembleEstimate(t=t, f=f, se=se, runs=100), BP).passed


def test_params_mismatch_raises():
    curve = solve_master(nw.two_node(P, Q), [0.0, 1.0])
    with pytest.raises(ValueError, match="not"):
        verify_bounds(curve, BassParams(P, 2 * Q))


def test_inhomogeneous_bounds():
    net = NetworkSpec.from_edges(3, [0.01, 0.02, 0.03], [(0, 1, 0.1), (1, 2, 0.2), (2, 0, 0.05), (0, 2, 0.05)])
    t = np.linspace(0, 200, 41)
    rep = verify_bounds_inhomogeneous(solve_master(net, t), net)
    h = check_homogeneity(net)
    assert rep.lower_params == BassParams(h.p_min, h.q_min)
    assert rep.upper_params == BassParams(h.p_max, h.q_max)
    assert rep.passed


def test_strictness_margins_three_node():
    t = np.array([0.0, 1 / (P + Q)])
    path = NetworkSpec.from_edges(3, P, [(1, 0, Q), (0, 1, Q / 2), (2, 1, Q / 2), (1, 2, Q)])
    for net in (nw.complete(3, P, Q), path):
        lo, hi = strictness_margin(solve_master(net, t), BP, t[1])
        assert lo > 1e-6 and hi > 1e-6
    with pytest.raises(ValueError, match="not on the curve grid"):
        strictness_margin(solve_master(path, t), BP, 3.0)


def test_gap_metrics_values():
    g = gap_metrics(BP.p, 100 * BP.p)
    assert g.lam == pytest.approx(100)
    assert g.ratio == pytest.approx(0.1302, abs=5e-4)
    assert g.relative_deviation < 0.05
    g1 = gap_metrics(BassParams(0.01, 0.01))
    assert g1.asymptotic is None and g1.relative_deviation is None
    assert 0 < g1.ratio < 1
    with pytest.raises(ValueError):
        gap_metrics(BassParams(0.01, 0.0))


def test_random_connected_homogeneous():
    rng = np.random.default_rng(0)
    for _ in range(10):
        net = random_connected_homogeneous(6, BP, rng, edge_prob=0.3)
        assert check_homogeneity(net).homogeneous
        assert check_homogeneity(net).q_min == pytest.approx(Q, abs=1e-12)


def test_conjecture_small():
    res = conjecture_experiment(3, BP, 10, seed=1)
    assert res.worst <= 1e-9
    assert res.candidates == []
    assert len(res.sample_edges) == 10
    assert res.f_complete[0] == 0.0
