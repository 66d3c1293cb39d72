"""Exact transient solutions of the stochastic Bass model.

``solve_master`` integrates the Kolmogorov forward equations over all ``2^M``
adopter subsets. States are stored as an ``M``-dimensional ``2 x ... x 2``
tensor whose flat C-order index is the bitmask ``sum_j X_j 2^j`` (bit ``j``
set means node ``j`` adopted), so node ``j`` lives on axis ``M - 1 - j``.

``solve_complete`` uses exchangeability on the homogeneous complete network:
the adopter count is a pure birth chain on ``0..M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .analytic import BassParams, _as_params
from .curves import ExactCurve
from .network import NetworkSpec, check_homogeneity, validate
from .ode import integrate

__all__ = [
    "MAX_EXACT_NODES",
    "ExactSolverError",
    "solve_master",
    "solve_complete",
    "pair_sandwich_check",
    "SandwichReport",
    "curve_meta",
]

MAX_EXACT_NODES = 20
# below this size a dense generator matvec beats the per-node tensor updates
DENSE_MAX_NODES = 8


class ExactSolverError(ValueError):
    pass


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ExactSolverError("time grid must be a non-empty 1-D array")
    if t[0] != 0:
        raise ExactSolverError("time grid must start at 0")
    if np.any(np.diff(t) <= 0):
        raise ExactSolverError("time grid must be strictly increasing")
    return t


def curve_meta(net: NetworkSpec, source: str) -> dict:
    """Metadata dict for a curve computed on ``net``; ``p``/``q`` only if homogeneous."""
    h = check_homogeneity(net)
    return {
        "M": net.node_count,
        "p": h.p_min if h.is_p_homogeneous and h.is_q_homogeneous else None,
        "q": h.q_min if h.is_p_homogeneous and h.is_q_homogeneous else None,
        "p_range": [h.p_min, h.p_max],
        "q_range": [h.q_min, h.q_max],
        "source": source,
        "network": net.metadata,
    }


class _MasterSystem:
    def __init__(self, net: NetworkSpec):
        M = net.node_count
        self.M = M
        self.shape = (2,) * M
        # slices selecting X_j = 0 / X_j = 1 on node j's axis
        self.without = []
        self.with_ = []
        for j in range(M):
            ax = M - 1 - j
            s0 = [slice(None)] * M
            s1 = [slice(None)] * M
            s0[ax] = 0
            s1[ax] = 1
            self.without.append(tuple(s0))
            self.with_.append(tuple(s1))

        self.rates = []
        exit_rate = np.zeros(self.shape)
        for j in range(M):
            lam = np.full(self.shape, net.external_rates[j])
            srcs, ws = net.incoming(j)
            for k, w in zip(srcs, ws):
                ind = np.zeros(2)
                ind[1] = w
                lam = lam + ind.reshape(self._axis_shape(k))
            r = np.ascontiguousarray(lam[self.without[j]])
            self.rates.append(r)
            exit_rate[self.without[j]] += r
        self.exit_rate = exit_rate
        self.dense = None
        if M <= DENSE_MAX_NODES:
            n = 2**M
            self.dense = np.column_stack([self._tensor_rhs(e) for e in np.eye(n)])

    def _axis_shape(self, node):
        sh = [1] * self.M
        sh[self.M - 1 - node] = 2
        return sh

    def rhs(self, t, y):
        if self.dense is not None:
            return self.dense @ y
        return self._tensor_rhs(y)

    def _tensor_rhs(self, y):
        P = y.reshape(self.shape)
        dP = -self.exit_rate * P
        for j in range(self.M):
            dP[self.with_[j]] += self.rates[j] * P[self.without[j]]
        return dP.reshape(-1)

    def marginal(self, P, j):
        return P[self.with_[j]].sum()

    def joint_nonadoption(self, P, i, j):
        sl = list(self.without[i])
        sl[self.M - 1 - j] = 0
        return P[tuple(sl)].sum()


def solve_master(
    net: NetworkSpec,
    t_grid,
    pairs=None,
    allow_isolated: bool = False,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    keep_states: bool = False,
) -> ExactCurve:
    """Exact per-node adoption probabilities from the full forward equations.

    ``pairs`` is ``None``, ``"all"`` or an iterable of ``(i, j)``; joint
    nonadoption probabilities are recorded only for those pairs.
    ``keep_states`` stores the full distribution at each output time in
    ``meta["states"]`` (bitmask order), for small ``M`` only.
    """
    M = net.node_count
    if M > MAX_EXACT_NODES:
        raise ExactSolverError(
            f"exact solver is capped at M <= {MAX_EXACT_NODES} (got M={M}); use Monte Carlo instead"
        )
    bad = validate(net, allow_isolated=allow_isolated)
    if bad:
        raise ExactSolverError("invalid network: " + "; ".join(v.message for v in bad))
    t = _check_grid(t_grid)
    if pairs == "all":
        pairs = list(combinations(range(M), 2))
    pairs = [tuple(sorted(pr)) for pr in (pairs or [])]

    sys = _MasterSystem(net)
    G = t.size
    f_nodes = np.empty((M, G))
    mass = np.empty(G)
    pair_vals = {pr: np.empty(G) for pr in pairs}
    states = [] if keep_states else None

    def observe(i, y):
        mass[i] = y.sum()
        P = np.where(y < 0, 0.0, y).reshape(sys.shape)
        for j in range(M):
            f_nodes[j, i] = sys.marginal(P, j)
        for pr in pairs:
            pair_vals[pr][i] = sys.joint_nonadoption(P, *pr)
        if keep_states:
            states.append(P.reshape(-1).copy())

    y0 = np.zeros(2**M)
    y0[0] = 1.0
    integrate(sys.rhs, t, y0, rtol=rtol, atol=atol, observe=observe)

    meta = curve_meta(net, "exact")
    if keep_states:
        meta["states"] = np.array(states)
    f_nodes = np.clip(f_nodes, 0.0, 1.0)
    return ExactCurve(t=t, f=f_nodes.mean(axis=0), f_nodes=f_nodes, meta=meta, pairs=pair_vals, mass=mass)


def _birth_rates(M: int, bp: BassParams) -> np.ndarray:
    n = np.arange(M, dtype=float)
    if M == 1:
        return np.array([bp.p])
    return (M - n) * (bp.p + bp.q * n / (M - 1))


def solve_complete(M: int, params, t_grid, rtol: float = 1e-12, atol: float = 1e-12) -> ExactCurve:
    """Adoption level on the homogeneous complete network via the adopter-count chain.

    Count ``n`` jumps to ``n + 1`` at rate ``(M - n)(p + q n / (M - 1))``
    (``M p`` when ``M = 1``); ``f = E[n] / M`` and every node has ``f_j = f``.
    ``params`` is a :class:`BassParams` or a ``(p, q)`` pair.
    """
    if int(M) != M or M < 1:
        raise ExactSolverError(f"M must be a positive integer, got {M}")
    M = int(M)
    bp = _as_params(params)
    t = _check_grid(t_grid)
    r = _birth_rates(M, bp)

    def rhs(_t, P):
        flow = r * P[:-1]
        dP = np.zeros_like(P)
        dP[:-1] -= flow
        dP[1:] += flow
        return dP

    y0 = np.zeros(M + 1)
    y0[0] = 1.0
    P = integrate(rhs, t, y0, rtol=rtol, atol=atol)
    P = np.clip(P, 0.0, None)
    f = np.clip(P @ np.arange(M + 1) / M, 0.0, 1.0)
    meta = {"M": M, "p": bp.p, "q": bp.q, "source": "exact", "network": f"complete(M={M})"}
    return ExactCurve(t=t, f=f, meta=meta, mass=P.sum(axis=1))


@dataclass
class SandwichReport:
    """Worst margins of ``[S_i][S_j] <= [S_i,S_j] <= e^{-(p_i+p_j)t}`` over all pairs."""

    t: np.ndarray
    lower_margin: np.ndarray  # min over pairs of [S_i,S_j] - [S_i][S_j]
    upper_margin: np.ndarray  # min over pairs of e^{-(p_i+p_j)t} - [S_i,S_j]
    slack: float

    @property
    def ok_lower(self) -> np.ndarray:
        return self.lower_margin >= -self.slack

    @property
    def ok_upper(self) -> np.ndarray:
        return self.upper_margin >= -self.slack

    @property
    def ok(self) -> bool:
        return bool(self.ok_lower.all() and self.ok_upper.all())


def pair_sandwich_check(net: NetworkSpec, t_grid, slack: float = 1e-9, allow_isolated: bool = True, **solver_opts):
    """Check the pair sandwich on every node pair of a small network.

    The ceiling is ``e^{-(p_i + p_j) t}``, the joint nonadoption of two
    isolated nodes, which is ``e^{-2pt}`` for homogeneous ``p``.
    """
    curve = solve_master(net, t_grid, pairs="all", allow_isolated=allow_isolated, **solver_opts)
    S = curve.nonadoption
    t = curve.t
    M = net.node_count
    if M < 2:
        raise ExactSolverError("pair check needs at least two nodes")
    lo = np.full(t.size, np.inf)
    hi = np.full(t.size, np.inf)
    p = net.external_rates
    for (i, j), joint in curve.pairs.items():
        lo = np.minimum(lo, joint - S[i] * S[j])
        hi = np.minimum(hi, np.exp(-(p[i] + p[j]) * t) - joint)
    return SandwichReport(t=t, lower_margin=lo, upper_margin=hi, slack=slack)
