"""Goodness metrics: separability, density, cohesiveness, clustering coefficient."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Graph, SetStats, connected_components, induced_subgraph, set_stats
from .seed import DEFAULT_EPSILON, DEFAULT_TELEPORT, approximate_ppr, sweep_order

EXACT_LIMIT = 20
APPROX_SEEDS = 8

# separability of a set without boundary edges; sorts above every finite value
SEPARABLE = math.inf


class GoodnessId(enum.Enum):
    SEPARABILITY = "separability"
    DENSITY = "density"
    COHESIVENESS = "cohesiveness"
    CLUSTERING_COEFFICIENT = "ccf"

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def parse(cls, token: str) -> "GoodnessId":
        t = token.strip().lower()
        for g in cls:
            if g.value == t:
                return g
        raise ValueError(f"unknown goodness metric {token!r}; choose from {', '.join(g.value for g in cls)}")


ALL_GOODNESS = tuple(GoodnessId)


class Mode(enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


def separability(stats: SetStats) -> float:
    if stats.c_S == 0:
        return SEPARABLE
    return stats.m_S / stats.c_S


def density(stats: SetStats) -> float:
    n = stats.n_S
    if n < 2:
        return 0.0
    return stats.m_S / (n * (n - 1) / 2)


@dataclass(frozen=True)
class Cut:
    """A cut of a community: ``side`` is a proper subset of its members."""

    conductance: float
    side: frozenset


def cut_conductance(graph: Graph, side: Iterable[int]) -> float:
    """``c / min(vol(side), vol(rest))`` within ``graph``."""
    st = set_stats(graph, side)
    small = min(st.volume, 2 * graph.edge_count - st.volume)
    return st.c_S / small if small else 1.0


def _exact_cut(sub: Graph) -> Cut:
    n = sub.node_count
    if n > EXACT_LIMIT:
        raise ValueError(f"exact cohesiveness limited to {EXACT_LIMIT} nodes, got {n}")
    # node n-1 always stays on the far side, so each cut is visited once
    masks = np.arange(1, 1 << (n - 1), dtype=np.int64)
    deg = np.array(sub.degrees, dtype=np.int64)
    vol = np.zeros(len(masks), dtype=np.int64)
    for i in range(n - 1):
        vol += ((masks >> i) & 1) * deg[i]
    inside = np.zeros(len(masks), dtype=np.int64)
    for u, v in sub.edges():
        if v == n - 1:
            continue
        inside += (masks >> u) & (masks >> v) & 1
    cut = vol - 2 * inside
    total = int(deg.sum())
    small = np.minimum(vol, total - vol)
    phi = cut / small
    best = int(np.argmin(phi))
    side = frozenset(i for i in range(n - 1) if (int(masks[best]) >> i) & 1)
    return Cut(float(phi[best]), side)


def _approx_cut(sub: Graph, teleport: float, epsilon: float) -> Cut:
    n = sub.node_count
    deg = sub.degrees
    total = 2 * sub.edge_count
    seeds = sorted(range(n), key=lambda u: (-deg[u], u))[:APPROX_SEEDS]
    best: Cut | None = None
    for seed in seeds:
        order = sweep_order(approximate_ppr(sub, seed, teleport, epsilon), sub, seed=seed)
        members: set[int] = set()
        vol = cut = 0
        for k, u in enumerate(order[: n - 1], start=1):
            inward = sum(1 for v in sub.adjacency[u] if v in members)
            members.add(u)
            vol += deg[u]
            cut += deg[u] - 2 * inward
            phi = cut / min(vol, total - vol)
            if best is None or phi < best.conductance:
                best = Cut(phi, frozenset(order[:k]))
    return best


def cohesiveness_cut(
    graph: Graph,
    s: Iterable[int],
    mode: Mode | str = Mode.EXACT,
    teleport: float = DEFAULT_TELEPORT,
    epsilon: float = DEFAULT_EPSILON,
) -> Cut | None:
    """Minimum-conductance internal cut of ``s`` (ids of ``graph``).

    Returns ``None`` for sets that cannot be cut meaningfully (a single node
    or a disconnected induced subgraph).
    """
    mode = Mode(mode)
    members = frozenset(s)
    if len(members) < 2 or len(connected_components(graph, members)) != 1:
        return None
    sub = induced_subgraph(graph, members)
    if mode is Mode.EXACT:
        cut = _exact_cut(sub.graph)
    else:
        cut = _approx_cut(sub.graph, teleport, epsilon)
    return Cut(cut.conductance, frozenset(sub.parent_ids[i] for i in cut.side))


def cohesiveness(
    graph: Graph,
    s: Iterable[int],
    mode: Mode | str = Mode.EXACT,
    teleport: float = DEFAULT_TELEPORT,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    cut = cohesiveness_cut(graph, s, mode, teleport, epsilon)
    return 0.0 if cut is None else cut.conductance


def clustering_coefficient(graph: Graph, s: Iterable[int]) -> float:
    """Mean local clustering coefficient inside the subgraph induced by ``s``."""
    members = frozenset(s)
    nbr_sets = graph.neighbor_sets
    total = 0.0
    for u in members:
        inside = nbr_sets[u] & members
        k = len(inside)
        if k < 2:
            continue
        closed = sum(len(nbr_sets[v] & inside) for v in inside) // 2
        total += closed / (k * (k - 1) / 2)
    return total / len(members)


def goodness(
    graph: Graph,
    s: Iterable[int],
    metric: GoodnessId,
    mode: Mode | str | None = None,
) -> float:
    """Evaluate one metric; cohesiveness is exact up to 20 members unless ``mode`` says otherwise."""
    members = frozenset(s)
    if metric is GoodnessId.SEPARABILITY:
        return separability(set_stats(graph, members))
    if metric is GoodnessId.DENSITY:
        return density(set_stats(graph, members))
    if metric is GoodnessId.COHESIVENESS:
        if mode is None:
            mode = Mode.EXACT if len(members) <= EXACT_LIMIT else Mode.APPROX
        return cohesiveness(graph, members, mode)
    if metric is GoodnessId.CLUSTERING_COEFFICIENT:
        return clustering_coefficient(graph, members)
    raise ValueError(metric)
