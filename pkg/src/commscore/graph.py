"""Graph loading, ground-truth community files, and set statistics.

All APIs speak internal node ids (contiguous from 0). External ids from
input files are kept in ``Graph.node_labels`` and translated only at the
CLI boundary.
"""

from __future__ import annotations

import enum
import io
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

NodeSet = frozenset  # members are internal ids; non-empty by contract


class GraphFormatError(ValueError):
    """Malformed edge-list or community file."""


class Source(enum.Enum):
    GROUND_TRUTH = "ground-truth"
    DETECTED = "detected"
    PERTURBED = "perturbed"


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    ``adjacency[u]`` is the ascending tuple of neighbours of ``u``;
    ``node_labels[u]`` is the external id of internal node ``u``.
    """

    adjacency: tuple[tuple[int, ...], ...]
    node_labels: tuple[int, ...] = ()
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]],
        node_count: int | None = None,
        node_labels: Sequence[int] | None = None,
    ) -> "Graph":
        """Build a graph over internal ids ``0..node_count-1``.

        Self-loops and duplicate edges are dropped and counted.
        """
        pairs = set()
        loops = dupes = 0
        top = -1
        for u, v in edges:
            u, v = int(u), int(v)
            top = max(top, u, v)
            if u == v:
                loops += 1
                continue
            key = (u, v) if u < v else (v, u)
            if key in pairs:
                dupes += 1
            else:
                pairs.add(key)
        n = top + 1 if node_count is None else node_count
        if top >= n:
            raise ValueError(f"edge endpoint {top} out of range for {n} nodes")
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in pairs:
            nbrs[u].append(v)
            nbrs[v].append(u)
        adjacency = tuple(tuple(sorted(a)) for a in nbrs)
        labels = tuple(range(n)) if node_labels is None else tuple(node_labels)
        if len(labels) != n:
            raise ValueError("node_labels length must equal node_count")
        return cls(adjacency, labels, loops, dupes)

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @cached_property
    def edge_count(self) -> int:
        return sum(self.degrees) // 2

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def label_index(self) -> dict[int, int]:
        """External id -> internal id."""
        return {lab: i for i, lab in enumerate(self.node_labels)}

    @cached_property
    def median_degree(self) -> int:
        return median_degree(self)

    def edges(self) -> Iterable[tuple[int, int]]:
        for u, nb in enumerate(self.adjacency):
            for v in nb:
                if u < v:
                    yield u, v

    def to_csr(self):
        """Adjacency as a ``scipy.sparse.csr_matrix`` of float64 ones."""
        import scipy.sparse as sp

        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter(
            (v for nb in self.adjacency for v in nb), dtype=np.int64, count=int(indptr[-1])
        )
        data = np.ones(len(indices))
        return sp.csr_matrix((data, indices, indptr), shape=(self.node_count,) * 2)


@dataclass(frozen=True)
class CommunitySet:
    communities: tuple[frozenset, ...]
    source: Source = Source.GROUND_TRUTH
    labels: tuple[str, ...] = ()
    dropped_ids: int = 0

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(len(self.communities))))
        if len(self.labels) != len(self.communities):
            raise ValueError("one label per community required")
        if any(not c for c in self.communities):
            raise ValueError("communities must be non-empty")

    def __len__(self) -> int:
        return len(self.communities)

    def __iter__(self):
        return iter(self.communities)

    def __getitem__(self, i):
        return self.communities[i]

    def validate(self, graph: Graph) -> None:
        for c in self.communities:
            validate_node_set(graph, c)


@dataclass(frozen=True)
class SetStats:
    n_S: int
    m_S: int
    c_S: int
    internal_degrees: dict = field(repr=False)
    total_degrees: dict = field(repr=False)
    volume: int


def validate_node_set(graph: Graph, s: Iterable[int]) -> None:
    s = list(s)
    if not s:
        raise ValueError("node set is empty")
    if len(set(s)) != len(s):
        raise ValueError("node set has duplicates")
    n = graph.node_count
    bad = [u for u in s if not 0 <= u < n]
    if bad:
        raise ValueError(f"node ids out of range: {sorted(bad)[:5]}")


def _text_lines(stream: IO) -> Iterable[str]:
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def _parse_ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise GraphFormatError(f"line {lineno}: non-integer token in {line.strip()!r}") from None


def load_edge_list(stream: IO) -> Graph:
    """Parse a SNAP-style edge list (``u v`` per line, ``#`` comments)."""
    if isinstance(stream, (bytes, str)):
        stream = io.StringIO(stream.decode("utf-8") if isinstance(stream, bytes) else stream)
    raw_edges = []
    index: dict[int, int] = {}
    for lineno, line in enumerate(_text_lines(stream), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        ids = _parse_ints(line, lineno)
        if len(ids) < 2:
            raise GraphFormatError(f"line {lineno}: expected two node ids")
        u, v = ids[0], ids[1]
        iu = index.setdefault(u, len(index))
        iv = index.setdefault(v, len(index))
        raw_edges.append((iu, iv))
    if not index:
        raise GraphFormatError("empty graph")
    labels = [0] * len(index)
    for ext, i in index.items():
        labels[i] = ext
    # internal ids follow ascending external ids so output is stable
    order = sorted(range(len(labels)), key=labels.__getitem__)
    remap = {old: new for new, old in enumerate(order)}
    g = Graph.from_edges(
        ((remap[u], remap[v]) for u, v in raw_edges),
        node_count=len(labels),
        node_labels=[labels[i] for i in order],
    )
    if g.edge_count == 0:
        raise GraphFormatError("empty graph: no edges after dropping self-loops")
    if g.dropped_self_loops or g.dropped_duplicates:
        log.info(
            "dropped %d self-loops and %d duplicate edges",
            g.dropped_self_loops,
            g.dropped_duplicates,
        )
    return g


def serialize_edge_list(graph: Graph) -> str:
    """Inverse of :func:`load_edge_list`, written with external ids."""
    lab = graph.node_labels
    lines = [f"# nodes: {graph.node_count} edges: {graph.edge_count}"]
    lines += [f"{lab[u]}\t{lab[v]}" for u, v in graph.edges()]
    return "\n".join(lines) + "\n"


def load_communities(stream: IO, graph: Graph) -> CommunitySet:
    """Parse one whitespace-separated group of external ids per line.

    Ids unknown to ``graph`` are dropped and counted; groups left empty are
    discarded.
    """
    if isinstance(stream, (bytes, str)):
        stream = io.StringIO(stream.decode("utf-8") if isinstance(stream, bytes) else stream)
    index = graph.label_index
    groups, labels = [], []
    dropped = 0
    for lineno, line in enumerate(_text_lines(stream), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        ids = _parse_ints(line, lineno)
        members = set()
        for ext in ids:
            i = index.get(ext)
            if i is None:
                dropped += 1
            else:
                members.add(i)
        if members:
            groups.append(frozenset(members))
            labels.append(f"line{lineno}")
    if dropped:
        log.warning("dropped %d community member ids absent from the graph", dropped)
    return CommunitySet(tuple(groups), Source.GROUND_TRUTH, tuple(labels), dropped)


def serialize_communities(graph: Graph, cs: Iterable[Iterable[int]]) -> str:
    lab = graph.node_labels
    return "".join("\t".join(str(lab[u]) for u in sorted(c)) + "\n" for c in cs)


def connected_components(graph: Graph, s: Iterable[int]) -> list[frozenset]:
    """Components of the subgraph induced by ``s``, ordered by smallest member."""
    members = set(s)
    adj = graph.adjacency
    comps = []
    for start in sorted(members):
        if start not in members:
            continue
        members.discard(start)
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v in members:
                    members.discard(v)
                    comp.append(v)
                    queue.append(v)
        comps.append(frozenset(comp))
    return comps


def preprocess_communities(raw: CommunitySet, graph: Graph) -> CommunitySet:
    """Split every raw group into its connected components."""
    out, labels = [], []
    for label, group in zip(raw.labels, raw.communities):
        comps = connected_components(graph, group)
        for j, comp in enumerate(comps):
            out.append(comp)
            labels.append(label if len(comps) == 1 else f"{label}.{j}")
    return CommunitySet(tuple(out), raw.source, tuple(labels), raw.dropped_ids)


def set_stats(graph: Graph, s: Iterable[int]) -> SetStats:
    members = s if isinstance(s, (set, frozenset)) else frozenset(s)
    adj = graph.adjacency
    internal, total = {}, {}
    m2 = vol = 0
    for u in members:
        k = 0
        for v in adj[u]:
            if v in members:
                k += 1
        internal[u] = k
        total[u] = len(adj[u])
        m2 += k
        vol += len(adj[u])
    return SetStats(
        n_S=len(members),
        m_S=m2 // 2,
        c_S=vol - m2,
        internal_degrees=internal,
        total_degrees=total,
        volume=vol,
    )


def median_degree(graph: Graph) -> int:
    """Lower median of the degree multiset."""
    if graph.node_count == 0:
        raise ValueError("median degree of an empty graph")
    ds = sorted(graph.degrees)
    return ds[(len(ds) - 1) // 2]


@dataclass(frozen=True, eq=False)
class Subgraph:
    """An induced subgraph plus the map back to parent ids."""

    graph: Graph
    parent_ids: tuple[int, ...]


def induced_subgraph(graph: Graph, s: Iterable[int]) -> Subgraph:
    """Reindex ``s`` contiguously (ascending parent id) and keep internal edges."""
    parent = tuple(sorted(set(s)))
    local = {u: i for i, u in enumerate(parent)}
    adj = graph.adjacency
    sub_adj = tuple(tuple(local[v] for v in adj[u] if v in local) for u in parent)
    labels = tuple(graph.node_labels[u] for u in parent) if graph.node_labels else parent
    return Subgraph(Graph(sub_adj, labels), parent)
