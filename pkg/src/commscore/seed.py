"""Community detection from a single seed node.

Truncated personalized PageRank (push), a degree-normalised sweep, and
local-minimum extraction on the sweep curve of any scoring function.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import Graph
from .scoring import ScoreId, SetState, odf, orient, score_from_state

DEFAULT_TELEPORT = 0.15
DEFAULT_EPSILON = 1e-5
DEFAULT_ALPHA = 1.2


@dataclass
class PprVector:
    entries: dict[int, float]
    seed: int
    teleport: float
    epsilon: float
    residual: dict[int, float] = field(default_factory=dict, repr=False)
    pushes: int = 0


def approximate_ppr(
    graph: Graph,
    seed: int,
    teleport: float = DEFAULT_TELEPORT,
    epsilon: float = DEFAULT_EPSILON,
) -> PprVector:
    """Lazy-walk push until every residual satisfies ``r(u) < epsilon * d(u)``.

    Each push moves ``teleport * r(u)`` into the estimate, keeps half of the
    remainder at ``u`` and spreads the other half evenly over its neighbours.
    """
    if not 0 < teleport < 1:
        raise ValueError("teleport must lie in (0, 1)")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 <= seed < graph.node_count:
        raise ValueError(f"seed {seed} not in graph")
    adj, deg = graph.adjacency, graph.degrees
    if deg[seed] == 0:
        return PprVector({seed: 1.0}, seed, teleport, epsilon)

    p: dict[int, float] = {}
    r: dict[int, float] = {seed: 1.0}
    queue = deque([seed])
    queued = {seed}
    pushes = 0
    while queue:
        u = queue.popleft()
        queued.discard(u)
        ru = r[u]
        du = deg[u]
        if ru < epsilon * du:
            continue
        pushes += 1
        p[u] = p.get(u, 0.0) + teleport * ru
        spread = (1 - teleport) * ru / 2
        r[u] = spread
        share = spread / du
        for v in adj[u]:
            rv = r.get(v, 0.0) + share
            r[v] = rv
            if v not in queued and rv >= epsilon * deg[v]:
                queue.append(v)
                queued.add(v)
        if u not in queued and spread >= epsilon * du:
            queue.append(u)
            queued.add(u)
    return PprVector(p, seed, teleport, epsilon, r, pushes)


def exact_ppr(graph: Graph, seed: int, teleport: float = DEFAULT_TELEPORT) -> np.ndarray:
    """Dense lazy-walk personalized PageRank by a linear solve.

    Solves ``p = teleport * e_s + (1 - teleport) * p W`` with the lazy walk
    ``W = (I + D^-1 A) / 2``. Intended for small graphs only.
    """
    n = graph.node_count
    a = graph.to_csr().toarray()
    deg = a.sum(axis=1)
    walk = np.eye(n) / 2
    nz = deg > 0
    walk[nz] += a[nz] / deg[nz, None] / 2
    walk[~nz, ~nz] = 1.0
    e = np.zeros(n)
    e[seed] = 1.0
    return np.linalg.solve((np.eye(n) - (1 - teleport) * walk).T, teleport * e)


def sweep_order(ppr: PprVector, graph: Graph, seed: int | None = None) -> list[int]:
    """Support nodes by descending ``r_u / d(u)``, ties by node id.

    When ``seed`` is given it is moved to the front.
    """
    deg = graph.degrees
    items = [u for u, val in ppr.entries.items() if val > 0]
    if not items:
        raise ValueError("empty PageRank vector")
    order = sorted(items, key=lambda u: (-(ppr.entries[u] / deg[u] if deg[u] else ppr.entries[u]), u))
    if seed is not None:
        if seed in ppr.entries:
            order.remove(seed)
        order.insert(0, seed)
    return order


@dataclass(frozen=True, eq=False)
class SweepCurve:
    order: tuple[int, ...]
    values: np.ndarray  # oriented: lower is better
    raw: np.ndarray
    score_id: ScoreId
    whole_component: np.ndarray  # prefix has no boundary edge
    trivial: np.ndarray  # prefix holds every edge of the graph

    def __len__(self) -> int:
        return len(self.order)


class _IncrementalSet:
    """Prefix statistics maintained as nodes are appended."""

    def __init__(self, graph: Graph, score_id: ScoreId):
        self.graph = graph
        self.members: set[int] = set()
        self.internal: dict[int, int] = {}
        self.st = SetState()
        self.dm = graph.median_degree
        self.track_odf = score_id in (ScoreId.MAX_ODF, ScoreId.AVG_ODF)
        self.track_tpr = score_id is ScoreId.TPR
        self.odf_sum = Fraction(0)
        self.heap: list[tuple[float, int, int]] = []
        self.triads: set[int] = set()

    def _member_terms(self, u: int, k: int, sign: int) -> None:
        d = self.graph.degrees[u]
        st = self.st
        if k > self.dm:
            st.fomd_count += sign
        if 2 * k < d:
            st.flake_count += sign
        if self.track_odf:
            self.odf_sum += sign * Fraction(odf(d - k, d))
            if sign > 0:
                heapq.heappush(self.heap, (-odf(d - k, d), u, k))

    def add(self, w: int) -> None:
        g, st = self.graph, self.st
        nbrs = g.neighbor_sets[w]
        inside = nbrs & self.members
        for a in inside:
            k = self.internal[a]
            self._member_terms(a, k, -1)
            self.internal[a] = k + 1
            self._member_terms(a, k + 1, +1)
        kw = len(inside)
        self.internal[w] = kw
        self._member_terms(w, kw, +1)
        if self.track_tpr:
            nbr_sets = g.neighbor_sets
            for a in inside:
                common = inside & nbr_sets[a]
                if common:
                    self.triads.add(w)
                    self.triads.add(a)
                    self.triads.update(common)
            st.tpr_count = len(self.triads)
        self.members.add(w)
        d = g.degrees[w]
        st.n_S += 1
        st.m_S += kw
        st.volume += d
        st.sum_sq_degree += d * d
        st.c_S = st.volume - 2 * st.m_S
        if self.track_odf:
            heap = self.heap
            while self.internal[heap[0][1]] != heap[0][2]:
                heapq.heappop(heap)
            st.max_odf = -heap[0][0]
            st.odf_sum = float(self.odf_sum)


def sweep_curve(graph: Graph, order: Sequence[int], score_id: ScoreId) -> SweepCurve:
    """Score every prefix of ``order``, updating counts incrementally."""
    if not order:
        raise ValueError("empty sweep order")
    if len(set(order)) != len(order):
        raise ValueError("sweep order has duplicates")
    inc = _IncrementalSet(graph, score_id)
    k = len(order)
    raw = np.empty(k)
    whole = np.zeros(k, dtype=bool)
    trivial = np.zeros(k, dtype=bool)
    two_m = 2 * graph.edge_count
    for i, u in enumerate(order):
        inc.add(u)
        raw[i] = score_from_state(graph, inc.st, score_id)
        whole[i] = inc.st.c_S == 0 and inc.st.volume > 0
        trivial[i] = whole[i] and inc.st.volume == two_m
    values = np.array([orient(score_id, v) for v in raw])
    return SweepCurve(tuple(order), values, raw, score_id, whole, trivial)


def find_local_minima(
    curve: SweepCurve | Sequence[float],
    alpha: float = DEFAULT_ALPHA,
    excluded: Sequence[bool] | None = None,
) -> list[int]:
    """Confirmed local minima of a lower-is-better curve, as 1-based prefix sizes.

    A candidate is the running minimum since the last confirmation, and only
    counts once the curve has descended into it. It is confirmed when a later
    value exceeds ``alpha`` times the candidate; a new low replaces it. When
    nothing is confirmed the global minimum is returned.
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if isinstance(curve, SweepCurve):
        excluded = curve.trivial if excluded is None else excluded
        values = curve.values
    else:
        values = curve
    vals = [float(v) for v in values]
    if excluded is None:
        excluded = [False] * len(vals)
    usable = [k for k in range(len(vals)) if not excluded[k]]
    if len(vals) < 2 or not usable:
        return [1]
    f = [vals[k] for k in usable]
    lo = min(f)
    if lo < 0:
        # the ratio test needs a non-negative curve
        f = [v + (1 - lo) for v in f]

    confirmed = []
    cand = 0
    seg_start = 0
    for i in range(1, len(f)):
        v = f[i]
        if v < f[cand]:
            cand = i
            continue
        descended = cand == 0 or f[cand] < f[cand - 1]
        if descended and cand >= seg_start and v > alpha * f[cand]:
            confirmed.append(cand)
            seg_start = i + 1
            cand = i + 1 if i + 1 < len(f) else i
    if not confirmed:
        confirmed = [min(range(len(f)), key=f.__getitem__)]
    return [usable[i] + 1 for i in confirmed]


@dataclass(frozen=True)
class DetectedCommunities:
    communities: tuple[frozenset, ...]
    minima_indices: tuple[int, ...]
    curve: SweepCurve


def seed_curve(
    graph: Graph,
    seed: int,
    score_id: ScoreId = ScoreId.CONDUCTANCE,
    teleport: float = DEFAULT_TELEPORT,
    epsilon: float = DEFAULT_EPSILON,
) -> SweepCurve:
    ppr = approximate_ppr(graph, seed, teleport, epsilon)
    return sweep_curve(graph, sweep_order(ppr, graph, seed=seed), score_id)


def detect_all_communities(
    graph: Graph,
    seed: int,
    score_id: ScoreId = ScoreId.CONDUCTANCE,
    teleport: float = DEFAULT_TELEPORT,
    epsilon: float = DEFAULT_EPSILON,
    alpha: float = DEFAULT_ALPHA,
) -> DetectedCommunities:
    curve = seed_curve(graph, seed, score_id, teleport, epsilon)
    minima = find_local_minima(curve, alpha)
    comms = tuple(frozenset(curve.order[:k]) for k in minima)
    return DetectedCommunities(comms, tuple(minima), curve)


def detect_community(
    graph: Graph,
    seed: int,
    score_id: ScoreId = ScoreId.CONDUCTANCE,
    teleport: float = DEFAULT_TELEPORT,
    epsilon: float = DEFAULT_EPSILON,
    alpha: float = DEFAULT_ALPHA,
) -> frozenset:
    """Prefix at the first confirmed minimum of the sweep curve."""
    return detect_all_communities(graph, seed, score_id, teleport, epsilon, alpha).communities[0]


def detect_lc_baseline(
    graph: Graph,
    seed: int,
    teleport: float = DEFAULT_TELEPORT,
    epsilon: float = DEFAULT_EPSILON,
) -> frozenset:
    """Prefix at the global minimum of the conductance sweep."""
    curve = seed_curve(graph, seed, ScoreId.CONDUCTANCE, teleport, epsilon)
    best = None
    for i, v in enumerate(curve.values):
        if curve.trivial[i]:
            continue
        if best is None or v < curve.values[best]:
            best = i
    k = 1 if best is None else best + 1
    return frozenset(curve.order[:k])
