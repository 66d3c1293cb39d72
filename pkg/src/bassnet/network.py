"""Network data model for the stochastic Bass model and the named families.

A network is a set of ``M`` nodes with per-node external rates ``p_j`` and a
sparse set of weighted directed influence edges ``(k, j, q_kj)``: once node
``k`` adopts, the adoption hazard of ``j`` grows by ``q_kj``. Edges are stored
grouped by target (incoming lists), since every solver consumes incoming
influence sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import networkx as nx
import numpy as np

__all__ = [
    "NetworkSpec",
    "Violation",
    "HomogeneityCheck",
    "validate",
    "in_weight",
    "in_weights",
    "check_homogeneity",
    "homogenize",
    "generate",
    "FAMILIES",
    "complete",
    "circle",
    "grid",
    "pairs",
    "two_node",
    "erdos_renyi",
    "scale_free",
    "small_world",
]


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Immutable weighted directed network.

    ``sources``/``targets``/``weights`` are parallel arrays sorted by
    ``(target, source)``; ``indptr`` delimits the incoming block of each
    target (CSR by target). Equality is structural and ignores ``metadata``.
    """

    node_count: int
    external_rates: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    indptr: np.ndarray
    metadata: str = ""

    @classmethod
    def from_edges(cls, node_count, p, edges: Iterable, metadata: str = "") -> "NetworkSpec":
        """Build a network from ``(source, target, weight)`` triples.

        ``p`` is either a scalar (same rate everywhere) or a length-``M``
        sequence. Duplicate ``(k, j)`` pairs and out-of-range ids raise
        ``ValueError``; self-loops and non-positive weights are accepted here
        and reported by :func:`validate`.
        """
        M = int(node_count)
        if M < 1:
            raise ValueError(f"node count must be positive, got {node_count}")
        p_arr = np.asarray(p, dtype=float)
        if p_arr.ndim == 0:
            p_arr = np.full(M, float(p_arr))
        if p_arr.shape != (M,):
            raise ValueError(f"expected {M} external rates, got shape {p_arr.shape}")

        triples = [(int(k), int(j), float(w)) for k, j, w in edges]
        seen = set()
        for k, j, _ in triples:
            if not (0 <= k < M and 0 <= j < M):
                raise ValueError(f"edge ({k}, {j}) references a node outside [0, {M})")
            if (k, j) in seen:
                raise ValueError(f"duplicate edge ({k}, {j})")
            seen.add((k, j))
        triples.sort(key=lambda e: (e[1], e[0]))

        src = np.array([e[0] for e in triples], dtype=np.int64)
        tgt = np.array([e[1] for e in triples], dtype=np.int64)
        w = np.array([e[2] for e in triples], dtype=float)
        indptr = np.zeros(M + 1, dtype=np.int64)
        np.cumsum(np.bincount(tgt, minlength=M), out=indptr[1:])
        for arr in (p_arr, src, tgt, w, indptr):
            arr.setflags(write=False)
        return cls(M, p_arr, src, tgt, w, indptr, metadata)

    @property
    def edge_count(self) -> int:
        return len(self.weights)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(k), int(j), float(w)) for k, j, w in zip(self.sources, self.targets, self.weights)]

    def incoming(self, j: int):
        """Sources and weights of the edges pointing at node ``j``."""
        lo, hi = self.indptr[j], self.indptr[j + 1]
        return self.sources[lo:hi], self.weights[lo:hi]

    @cached_property
    def out_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, targets, weights)`` grouped by source."""
        order = np.lexsort((self.targets, self.sources))
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.sources, minlength=self.node_count), out=indptr[1:])
        return indptr, self.targets[order].copy(), self.weights[order].copy()

    def dense_influence(self) -> np.ndarray:
        """Dense ``Q[k, j]`` matrix (small networks only)."""
        Q = np.zeros((self.node_count, self.node_count))
        Q[self.sources, self.targets] = self.weights
        return Q

    def with_metadata(self, metadata: str) -> "NetworkSpec":
        return NetworkSpec.from_edges(self.node_count, self.external_rates, self.edges, metadata)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkSpec):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.external_rates, other.external_rates)
            and np.array_equal(self.sources, other.sources)
            and np.array_equal(self.targets, other.targets)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"NetworkSpec(M={self.node_count}, edges={self.edge_count}, meta={self.metadata!r})"


@dataclass(frozen=True)
class Violation:
    kind: str  # "isolated" | "self_loop" | "nonpositive_weight" | "nonpositive_p"
    message: str
    node: int | None = None
    edge: tuple[int, int] | None = None


@dataclass(frozen=True)
class HomogeneityCheck:
    is_p_homogeneous: bool
    is_q_homogeneous: bool
    p_min: float
    p_max: float
    q_min: float
    q_max: float
    tolerance: float

    @property
    def homogeneous(self) -> bool:
        return self.is_p_homogeneous and self.is_q_homogeneous


def validate(net: NetworkSpec, allow_isolated: bool = False) -> list[Violation]:
    """Return one :class:`Violation` per broken model assumption (empty if none)."""
    out = []
    for j, pj in enumerate(net.external_rates):
        if not pj > 0:
            out.append(Violation("nonpositive_p", f"p_j = {pj!r} <= 0 at node {j}", node=j))
    for k, j, w in net.edges:
        if k == j:
            out.append(Violation("self_loop", f"self-loop at node {j}", node=j, edge=(k, j)))
        if not w > 0:
            out.append(Violation("nonpositive_weight", f"non-positive weight {w!r} on edge ({k}, {j})", edge=(k, j)))
    if not allow_isolated:
        qj = in_weights(net)
        for j in np.flatnonzero(~(qj > 0)):
            out.append(Violation("isolated", f"q_j = 0 at node {j}", node=int(j)))
    return out


def in_weight(net: NetworkSpec, j: int) -> float:
    """Total incoming influence ``q_j`` of node ``j``."""
    if not 0 <= j < net.node_count:
        raise IndexError(f"node {j} outside [0, {net.node_count})")
    _, w = net.incoming(j)
    return math.fsum(w)


def in_weights(net: NetworkSpec) -> np.ndarray:
    return np.array([in_weight(net, j) for j in range(net.node_count)])


def check_homogeneity(net: NetworkSpec, tolerance: float = 1e-12) -> HomogeneityCheck:
    p = net.external_rates
    q = in_weights(net)
    return HomogeneityCheck(
        is_p_homogeneous=bool(p.max() - p.min() <= tolerance),
        is_q_homogeneous=bool(q.max() - q.min() <= tolerance),
        p_min=float(p.min()),
        p_max=float(p.max()),
        q_min=float(q.min()),
        q_max=float(q.max()),
        tolerance=tolerance,
    )


def homogenize(net: NetworkSpec, p: float, q: float) -> NetworkSpec:
    """Same edge pattern, ``p_j = p`` everywhere and every in-weight rescaled to ``q``."""
    qj = in_weights(net)
    bad = np.flatnonzero(~(qj > 0))
    if bad.size:
        raise ValueError(f"cannot homogenize: q_j = 0 at node(s) {bad.tolist()}")
    edges = [(k, j, w * (q / qj[j])) for k, j, w in net.edges]
    return NetworkSpec.from_edges(net.node_count, float(p), edges, net.metadata)


# ---------------------------------------------------------------------------
# families

def _check_rates(p, q):
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")


def _from_weight_map(M, p, wmap, meta):
    return NetworkSpec.from_edges(M, p, ((k, j, w) for (k, j), w in wmap.items()), meta)


def complete(M: int, p: float, q: float) -> NetworkSpec:
    if M < 2:
        raise ValueError("complete network needs M >= 2")
    _check_rates(p, q)
    w = q / (M - 1)
    edges = [(k, j, w) for j in range(M) for k in range(M) if k != j]
    return NetworkSpec.from_edges(M, p, edges, f"complete(M={M}, p={p!r}, q={q!r})")


def two_node(p: float, q: float) -> NetworkSpec:
    return complete(2, p, q)


def circle(M: int, p: float, q: float, sided: int = 1) -> NetworkSpec:
    """One-sided (influenced by left neighbour, weight q) or two-sided (q/2 each) ring."""
    if M < 2:
        raise ValueError("circle needs M >= 2")
    if sided not in (1, 2):
        raise ValueError(f"sided must be 1 or 2, got {sided}")
    _check_rates(p, q)
    wmap: dict[tuple[int, int], float] = {}
    for j in range(M):
        if sided == 1:
            wmap[((j - 1) % M, j)] = q
        else:
            for k in ((j - 1) % M, (j + 1) % M):
                wmap[(k, j)] = wmap.get((k, j), 0.0) + q / 2
    return _from_weight_map(M, p, wmap, f"circle(M={M}, p={p!r}, q={q!r}, sided={sided})")


def grid(D: int, side: int, p: float, q: float) -> NetworkSpec:
    """D-dimensional periodic lattice, each node influenced by its 2D neighbours at q/(2D)."""
    if D < 1 or side < 2:
        raise ValueError("grid needs D >= 1 and side >= 2")
    _check_rates(p, q)
    M = side**D
    shape = (side,) * D
    w = q / (2 * D)
    wmap: dict[tuple[int, int], float] = {}
    for j in range(M):
        coord = np.unravel_index(j, shape)
        for axis in range(D):
            for step in (-1, 1):
                nb = list(coord)
                nb[axis] = (nb[axis] + step) % side
                k = int(np.ravel_multi_index(nb, shape))
                wmap[(k, j)] = wmap.get((k, j), 0.0) + w
    return _from_weight_map(M, p, wmap, f"grid(D={D}, side={side}, p={p!r}, q={q!r})")


def pairs(M: int, p: float, q: float) -> NetworkSpec:
    if M < 2 or M % 2:
        raise ValueError(f"M must be even, got {M}")
    _check_rates(p, q)
    edges = []
    for i in range(0, M, 2):
        edges += [(i, i + 1, q), (i + 1, i, q)]
    return NetworkSpec.from_edges(M, p, edges, f"pairs(M={M}, p={p!r}, q={q!r})")


def _from_skeleton(G: nx.Graph, p, q, meta) -> NetworkSpec:
    M = G.number_of_nodes()
    deg = dict(G.degree())
    isolated = [v for v, d in deg.items() if d == 0]
    if isolated:
        raise ValueError(f"skeleton has isolated nodes {isolated[:5]}")
    edges = []
    for u, v in G.edges():
        if u == v:
            continue
        edges.append((u, v, q / deg[v]))
        edges.append((v, u, q / deg[u]))
    net = NetworkSpec.from_edges(M, p, edges, meta)
    # degree-based weights already sum to q; the rescale removes rounding drift
    return homogenize(net, p, q)


def erdos_renyi(M: int, lam: float, p: float, q: float, seed=None, max_redraws: int = 100) -> NetworkSpec:
    """G(M, lam/M) skeleton; isolated nodes get their edge draws repeated."""
    if M < 2:
        raise ValueError("erdos_renyi needs M >= 2")
    prob = lam / M
    if not 0 < prob <= 1:
        raise ValueError(f"edge probability lam/M = {prob} outside (0, 1]")
    _check_rates(p, q)
    rng = np.random.default_rng(seed)
    G = nx.fast_gnp_random_graph(M, prob, seed=int(rng.integers(2**32)))
    others = np.arange(M)
    for v in range(M):
        attempt = 0
        while G.degree(v) == 0:
            if attempt == max_redraws:
                raise ValueError(f"node {v} still isolated after {max_redraws} redraws")
            hits = others[(rng.random(M) < prob) & (others != v)]
            G.add_edges_from((v, int(u)) for u in hits)
            attempt += 1
    return _from_skeleton(G, p, q, f"erdos_renyi(M={M}, lam={lam!r}, p={p!r}, q={q!r}, seed={seed!r})")


def scale_free(M: int, m_attach: int, p: float, q: float, seed=None) -> NetworkSpec:
    if not 1 <= m_attach < M:
        raise ValueError("scale_free needs 1 <= m_attach < M")
    _check_rates(p, q)
    G = nx.barabasi_albert_graph(M, m_attach, seed=seed)
    return _from_skeleton(G, p, q, f"scale_free(M={M}, m_attach={m_attach}, p={p!r}, q={q!r}, seed={seed!r})")


def small_world(M: int, k: int, rewire_prob: float, p: float, q: float, seed=None) -> NetworkSpec:
    if not (2 <= k < M and k % 2 == 0):
        raise ValueError("small_world needs an even k with 2 <= k < M")
    if not 0 <= rewire_prob <= 1:
        raise ValueError(f"rewire_prob must lie in [0, 1], got {rewire_prob}")
    _check_rates(p, q)
    G = nx.watts_strogatz_graph(M, k, rewire_prob, seed=seed)
    meta = f"small_world(M={M}, k={k}, rewire_prob={rewire_prob!r}, p={p!r}, q={q!r}, seed={seed!r})"
    return _from_skeleton(G, p, q, meta)


FAMILIES = {
    "complete": complete,
    "circle": circle,
    "grid": grid,
    "pairs": pairs,
    "erdos_renyi": erdos_renyi,
    "scale_free": scale_free,
    "small_world": small_world,
}
_SEEDED = {"erdos_renyi", "scale_free", "small_world"}


def generate(family: str, seed=None, **params) -> NetworkSpec:
    """Dispatch to a named family, e.g. ``generate("circle", M=10, p=0.01, q=0.1, sided=2)``."""
    try:
        build = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    if family in _SEEDED:
        return build(seed=seed, **params)
    return build(**params)
