"""Checks of observed adoption curves against the universal two-node / Bass bounds.

Lower bound: the two-node curve; upper bound: the compartmental Bass curve.
Exact curves are compared with an absolute slack of ``1e-9``; Monte Carlo
curves with ``3 se`` per point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import BassParams, _as_params
from .curves import AdoptionCurve
from .exact import solve_complete, solve_master
from .network import NetworkSpec, check_homogeneity, homogenize

__all__ = [
    "EXACT_SLACK",
    "MC_SIGMAS",
    "MC_MAX_FLAGGED",
    "BoundsReport",
    "GapMetrics",
    "ConjectureResult",
    "verify_bounds",
    "verify_bounds_inhomogeneous",
    "strictness_margin",
    "gap_metrics",
    "conjecture_experiment",
    "random_connected_homogeneous",
]

EXACT_SLACK = 1e-9
MC_SIGMAS = 3.0
MC_MAX_FLAGGED = 0.01


@dataclass
class BoundsReport:
    t: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    observed: np.ndarray
    slack: np.ndarray
    source: str
    lower_params: BassParams
    upper_params: BassParams
    node_margin_low: np.ndarray | None = None  # min over nodes, per time
    node_margin_high: np.ndarray | None = None
    node_violation_low: np.ndarray | None = None  # any node beyond its slack, per time
    node_violation_high: np.ndarray | None = None

    @property
    def margin_low(self) -> np.ndarray:
        return self.observed - self.lower

    @property
    def margin_high(self) -> np.ndarray:
        return self.upper - self.observed

    @property
    def violation_low(self) -> np.ndarray:
        v = self.margin_low < -self.slack
        if self.node_violation_low is not None:
            v = v | self.node_violation_low
        return v

    @property
    def violation_high(self) -> np.ndarray:
        v = self.margin_high < -self.slack
        if self.node_violation_high is not None:
            v = v | self.node_violation_high
        return v

    @property
    def flagged(self) -> np.ndarray:
        return self.violation_low | self.violation_high

    @property
    def flagged_fraction(self) -> float:
        return float(self.flagged.mean())

    @property
    def worst_margin_low(self) -> float:
        m = self.margin_low
        if self.node_margin_low is not None:
            m = np.minimum(m, self.node_margin_low)
        return float(m.min())

    @property
    def worst_margin_high(self) -> float:
        m = self.margin_high
        if self.node_margin_high is not None:
            m = np.minimum(m, self.node_margin_high)
        return float(m.min())

    @property
    def passed(self) -> bool:
        """No flagged point for exact curves; at most 1% flagged for Monte Carlo."""
        if self.source == "mc":
            return self.flagged_fraction <= MC_MAX_FLAGGED
        return not self.flagged.any()

    def summary(self) -> dict:
        return {
            "source": self.source,
            "points": int(self.t.size),
            "lower_p": self.lower_params.p,
            "lower_q": self.lower_params.q,
            "upper_p": self.upper_params.p,
            "upper_q": self.upper_params.q,
            "slack": "3*se" if self.source == "mc" else EXACT_SLACK,
            "violations_low": int(self.violation_low.sum()),
            "violations_high": int(self.violation_high.sum()),
            "flagged_fraction": self.flagged_fraction,
            "worst_margin_low": self.worst_margin_low,
            "worst_margin_high": self.worst_margin_high,
            "passed": self.passed,
        }


def _report(curve: AdoptionCurve, low: BassParams, up: BassParams, slack=None) -> BoundsReport:
    t = np.asarray(curve.t, dtype=float)
    mc = curve.se is not None
    lower = analytic.f_two_node(t, low)
    upper = analytic.f_bass(t, up)
    if slack is None:
        slack = MC_SIGMAS * np.asarray(curve.se) if mc else np.full(t.size, EXACT_SLACK)
    else:
        slack = np.broadcast_to(np.asarray(slack, dtype=float), t.shape).copy()
    rep = BoundsReport(
        t=t,
        lower=lower,
        upper=upper,
        observed=np.asarray(curve.f, dtype=float),
        slack=slack,
        source="mc" if mc else curve.meta.get("source", "exact"),
        lower_params=low,
        upper_params=up,
    )
    if curve.f_nodes is not None:
        fn = np.asarray(curve.f_nodes)
        node_slack = MC_SIGMAS * np.asarray(curve.node_se) if mc and curve.node_se is not None else slack
        lo_m, hi_m = fn - lower, upper - fn
        rep.node_margin_low = lo_m.min(axis=0)
        rep.node_margin_high = hi_m.min(axis=0)
        rep.node_violation_low = (lo_m < -node_slack).any(axis=0)
        rep.node_violation_high = (hi_m < -node_slack).any(axis=0)
    return rep


def verify_bounds(curve: AdoptionCurve, params, slack=None) -> BoundsReport:
    """Compare ``curve`` (and its per-node curves, if any) with the universal bounds at ``(p, q)``.

    Raises ``ValueError`` when the curve's own ``p``/``q`` metadata disagree
    with ``params``.
    """
    bp = _as_params(params)
    own = curve.params
    if own is not None and not (math.isclose(own.p, bp.p, rel_tol=1e-9) and math.isclose(own.q, bp.q, rel_tol=1e-9)):
        raise ValueError(f"curve was computed for (p={own.p}, q={own.q}), not (p={bp.p}, q={bp.q})")
    return _report(curve, bp, bp, slack)


def verify_bounds_inhomogeneous(curve: AdoptionCurve, net: NetworkSpec, slack=None) -> BoundsReport:
    """Bounds for arbitrary rates: two-node at ``(min p_j, min q_j)``, Bass at ``(max p_j, max q_j)``."""
    h = check_homogeneity(net)
    if not h.p_min > 0 or not h.q_min > 0:
        raise ValueError("lower bound needs min p_j > 0 and min q_j > 0")
    return _report(curve, BassParams(h.p_min, h.q_min), BassParams(h.p_max, h.q_max), slack)


def strictness_margin(curve: AdoptionCurve, params, t_probe: float) -> tuple[float, float]:
    """``(f - lower, upper - f)`` at a grid time; raises if ``t_probe`` is off-grid."""
    bp = _as_params(params)
    i = curve.at(t_probe)
    ti = float(curve.t[i])
    f = float(curve.f[i])
    return f - analytic.f_two_node(ti, bp), analytic.f_bass(ti, bp) - f


# ---------------------------------------------------------------------------
# gap between the bounds


@dataclass(frozen=True)
class GapMetrics:
    lam: float
    t_half_lower: float
    t_half_upper: float
    ratio: float
    asymptotic: float | None  # undefined for lam <= 1
    relative_deviation: float | None  # |ratio - asymptotic| / ratio


def gap_metrics(params, q=None) -> GapMetrics:
    bp = _as_params(params, q)
    if not bp.q > 0:
        raise ValueError("gap metrics need q > 0")
    hint = 1.0 / (bp.p + bp.q)
    lower = analytic.half_life(lambda t: analytic.f_two_node(t, bp), hint).t_half
    upper = analytic.half_life(lambda t: analytic.f_bass(t, bp), hint).t_half
    ratio = upper / lower
    asym = dev = None
    if bp.lam > 1:
        asym = analytic.half_life_ratio_asymptotic(bp.lam)
        dev = abs(ratio - asym) / ratio
    return GapMetrics(bp.lam, lower, upper, ratio, asym, dev)


# ---------------------------------------------------------------------------
# fixed-M supremum experiment


def random_connected_homogeneous(M: int, bp: BassParams, rng: np.random.Generator, edge_prob: float = 0.5,
                                 max_tries: int = 10_000) -> NetworkSpec:
    """ER(M, edge_prob) skeleton conditioned on connectivity, random positive weights, homogenized."""
    iu, ju = np.triu_indices(M, 1)
    for _ in range(max_tries):
        keep = rng.random(iu.size) < edge_prob
        a, b = iu[keep], ju[keep]
        if not _connected(M, a, b):
            continue
        wts = rng.uniform(0.1, 1.0, size=(2, a.size))
        edges = list(zip(a.tolist(), b.tolist(), wts[0])) + list(zip(b.tolist(), a.tolist(), wts[1]))
        net = NetworkSpec.from_edges(M, bp.p, edges, f"random_connected(M={M}, edge_prob={edge_prob})")
        return homogenize(net, bp.p, bp.q)
    raise RuntimeError("could not sample a connected skeleton")


def _connected(M, a, b):
    parent = list(range(M))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in zip(a, b):
        parent[find(u)] = find(v)
    return len({find(x) for x in range(M)}) == 1


@dataclass
class ConjectureResult:
    M: int
    params: BassParams
    t: np.ndarray
    f_complete: np.ndarray
    max_excess: np.ndarray  # per time, max over samples of f - f_complete
    sample_excess: np.ndarray  # per sample, max over time
    sample_edges: list = field(default_factory=list)
    tolerance: float = EXACT_SLACK

    @property
    def worst(self) -> float:
        return float(self.max_excess.max())

    @property
    def candidates(self) -> list[int]:
        """Samples whose excess exceeds the tolerance (counterexample candidates, not refutations)."""
        return [int(i) for i in np.flatnonzero(self.sample_excess > self.tolerance)]


def conjecture_experiment(M: int, params, sample_count: int, seed: int = 42, t_grid=None,
                          edge_prob: float = 0.5) -> ConjectureResult:
    """Sample homogeneous connected networks with ``M`` nodes and compare with the complete one."""
    bp = _as_params(params)
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if M < 2:
        raise ValueError("M must be >= 2")
    if t_grid is None:
        t_grid = np.linspace(0.0, 10.0 / (bp.p + bp.q), 51)
    t = np.asarray(t_grid, dtype=float)
    ref = solve_complete(M, bp, t).f
    rng = np.random.default_rng(seed)
    max_excess = np.full(t.size, -np.inf)
    per_sample = np.empty(sample_count)
    edge_counts = []
    for s in range(sample_count):
        net = random_connected_homogeneous(M, bp, rng, edge_prob)
        ex = solve_master(net, t).f - ref
        max_excess = np.maximum(max_excess, ex)
        per_sample[s] = ex.max()
        edge_counts.append(net.edge_count)
    return ConjectureResult(M, bp, t, ref, max_excess, per_sample, edge_counts)
