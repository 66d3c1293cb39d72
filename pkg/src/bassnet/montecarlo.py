"""Event-driven simulation of the stochastic Bass model on a network.

Each trajectory is a direct-method Gillespie run. Per-node hazards live in a
flat binary sum tree, so drawing the next adopter and updating the hazards
of its out-neighbours are both ``O(log M)``. Trajectory ``i`` of an ensemble
draws its uniforms from a Philox stream keyed by a 64-bit seed mixed from
``(base_seed, i)``, which makes ensembles independent of scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .curves import EnsembleEstimate
from .exact import curve_meta
from .network import NetworkSpec, validate

__all__ = [
    "TrajectoryRecord",
    "trajectory_seed",
    "simulate_trajectory",
    "estimate_ensemble",
]


@dataclass
class TrajectoryRecord:
    """One realisation; ``adoption_times[j]`` is ``inf`` when ``j`` is censored at ``t_max``."""

    seed: int
    adoption_times: np.ndarray
    t_max: float

    @property
    def censored(self) -> np.ndarray:
        return ~np.isfinite(self.adoption_times)

    def adopted_by(self, t) -> np.ndarray:
        """Indicator ``X_j(t)`` for every node."""
        return self.adoption_times <= t


def trajectory_seed(base_seed: int, index: int) -> int:
    """64-bit per-trajectory key mixed from ``(base_seed, index)``."""
    ss = np.random.SeedSequence([int(base_seed) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _uniforms(seed: int, n: int) -> np.ndarray:
    return np.random.Generator(np.random.Philox(key=seed)).random(n)


@numba.njit(cache=True, nogil=True)
def _gillespie(p, out_ptr, out_tgt, out_w, t_max, u, times, order):
    """Fill ``times``/``order``; return the number of adoptions before ``t_max``."""
    M = p.size
    cap = 1
    while cap < M:
        cap *= 2
    tree = np.zeros(2 * cap)
    for j in range(M):
        tree[cap + j] = p[j]
    for i in range(cap - 1, 0, -1):
        tree[i] = tree[2 * i] + tree[2 * i + 1]
    adopted = np.zeros(M, dtype=np.bool_)
    times[:] = np.inf

    t = 0.0
    n = 0
    while n < M:
        total = tree[1]
        if total <= 0.0:
            break
        w = 1.0 - u[2 * n]
        if w >= 1.0:
            w = 1.0 - 2.0**-53
        t_next = t - np.log(w) / total
        if t_next <= t:
            raise RuntimeError("non-increasing event time")
        t = t_next
        if t > t_max:
            break

        target = u[2 * n + 1] * total
        i = 1
        while i < cap:
            left = tree[2 * i]
            if target < left or tree[2 * i + 1] <= 0.0:
                i = 2 * i
            else:
                target -= left
                i = 2 * i + 1
        j = i - cap

        adopted[j] = True
        times[j] = t
        order[n] = j
        n += 1
        i = cap + j
        tree[i] = 0.0
        i //= 2
        while i >= 1:
            tree[i] = tree[2 * i] + tree[2 * i + 1]
            i //= 2
        for e in range(out_ptr[j], out_ptr[j + 1]):
            k = out_tgt[e]
            if adopted[k]:
                continue
            i = cap + k
            tree[i] += out_w[e]
            i //= 2
            while i >= 1:
                tree[i] = tree[2 * i] + tree[2 * i + 1]
                i //= 2
    return n


def _arrays(net: NetworkSpec):
    ptr, tgt, w = net.out_csr
    return np.ascontiguousarray(net.external_rates, dtype=np.float64), ptr, tgt, w


def _check(net: NetworkSpec, t_max: float):
    bad = [v for v in validate(net, allow_isolated=True)]
    if bad:
        raise ValueError("invalid network: " + "; ".join(v.message for v in bad))
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")


def simulate_trajectory(net: NetworkSpec, t_max: float, seed: int) -> TrajectoryRecord:
    _check(net, t_max)
    M = net.node_count
    p, ptr, tgt, w = _arrays(net)
    times = np.empty(M)
    order = np.empty(M, dtype=np.int64)
    _gillespie(p, ptr, tgt, w, float(t_max), _uniforms(seed, 2 * M), times, order)
    return TrajectoryRecord(seed=int(seed), adoption_times=times, t_max=float(t_max))


def estimate_ensemble(
    net: NetworkSpec,
    t_grid,
    runs: int,
    base_seed: int = 42,
    per_node: bool = False,
    threads: int | None = None,
) -> EnsembleEstimate:
    """Monte Carlo estimate of ``f(t)`` (and optionally each ``f_j(t)``) on ``t_grid``.

    ``se`` is ``sqrt(v / R)`` with ``v`` the sample variance of the
    per-trajectory adoption fractions. Per-node errors use the indicator
    variance. The result does not depend on ``threads``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be non-negative and strictly increasing")
    if runs < 2:
        raise ValueError("need at least two runs")
    t_max = float(t[-1]) if t[-1] > 0 else 1.0
    _check(net, t_max)
    M = net.node_count
    G = t.size
    p, ptr, tgt, w = _arrays(net)
    frac = np.empty((runs, G))
    threads = max(1, int(threads or os.cpu_count() or 1))

    def work(indices):
        times = np.empty(M)
        order = np.empty(M, dtype=np.int64)
        first_hit = np.zeros((M, G + 1), dtype=np.int64) if per_node else None
        for r in indices:
            u = _uniforms(trajectory_seed(base_seed, r), 2 * M)
            n = _gillespie(p, ptr, tgt, w, t_max, u, times, order)
            ev = times[order[:n]]
            frac[r] = np.searchsorted(ev, t, side="right") / M
            if per_node:
                g0 = np.searchsorted(t, times, side="left")
                np.add.at(first_hit, (np.arange(M), g0), 1)
        return first_hit

    chunks = [range(i, runs, threads) for i in range(threads)]
    if threads == 1:
        hits = [work(chunks[0])]
    else:
        with ThreadPoolExecutor(threads) as ex:
            hits = list(ex.map(work, chunks))

    f = frac.mean(axis=0)
    se = np.sqrt(frac.var(axis=0, ddof=1) / runs)
    f_nodes = node_se = None
    if per_node:
        counts = np.cumsum(sum(hits)[:, :G], axis=1)
        f_nodes = counts / runs
        node_se = np.sqrt(f_nodes * (1 - f_nodes) / (runs - 1))
    meta = curve_meta(net, "mc")
    meta.update(seed=int(base_seed), runs=int(runs))
    return EnsembleEstimate(
        t=t, f=f, se=se, f_nodes=f_nodes, node_se=node_se, meta=meta, runs=int(runs), base_seed=int(base_seed)
    )
