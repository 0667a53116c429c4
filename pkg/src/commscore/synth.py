"""Planted-partition graphs with known ground-truth blocks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import CommunitySet, Graph, Source

MAX_NODES = 10**6


@dataclass(frozen=True)
class PlantedPartitionSpec:
    num_communities: int
    community_size: int
    p_in: float
    p_out: float
    rng_seed: int = 0
    sizes: tuple[int, ...] | None = None  # overrides the uniform block size

    def __post_init__(self):
        if not 0 <= self.p_out <= self.p_in <= 1:
            raise ValueError("need 0 <= p_out <= p_in <= 1")
        if self.block_sizes and min(self.block_sizes) < 1:
            raise ValueError("block sizes must be positive")
        if sum(self.block_sizes) > MAX_NODES:
            raise ValueError(f"at most {MAX_NODES} nodes")

    @property
    def block_sizes(self) -> tuple[int, ...]:
        if self.sizes is not None:
            return tuple(self.sizes)
        return (self.community_size,) * self.num_communities

    @classmethod
    def with_size_range(cls, num_communities, lo, hi, p_in, p_out, rng_seed=0):
        """Block sizes drawn uniformly from ``[lo, hi]`` by the same seed."""
        rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(1,)))
        sizes = tuple(int(x) for x in rng.integers(lo, hi + 1, size=num_communities))
        return cls(num_communities, 0, p_in, p_out, rng_seed, sizes)


def _pairs_from_index(idx: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over ``i < j < size`` (row-major) to pairs."""
    # row i starts at i*(2n-i-1)/2; invert with the quadratic formula
    n = size
    i = np.floor(((2 * n - 1) - np.sqrt((2 * n - 1) ** 2 - 8 * idx)) / 2).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    # guard the float root against off-by-one
    over = start > idx
    i[over] -= 1
    start = i * (2 * n - i - 1) // 2
    under = idx - start >= n - i - 1
    i[under] += 1
    start = i * (2 * n - i - 1) // 2
    j = idx - start + i + 1
    return i, j


def _block_edges(size: int, p: float, rng: np.random.Generator) -> np.ndarray:
    pairs = size * (size - 1) // 2
    if pairs == 0 or p == 0:
        return np.zeros((0, 2), dtype=np.int64)
    k = int(rng.binomial(pairs, p))
    idx = np.sort(rng.choice(pairs, size=k, replace=False)) if k < pairs else np.arange(pairs)
    i, j = _pairs_from_index(idx.astype(np.int64), size)
    return np.column_stack([i, j])


def _inter_edges(sizes: Sequence[int], p: float, rng: np.random.Generator) -> np.ndarray:
    n = sum(sizes)
    block = np.repeat(np.arange(len(sizes)), sizes)
    inter_pairs = n * (n - 1) // 2 - sum(s * (s - 1) // 2 for s in sizes)
    if inter_pairs == 0 or p == 0:
        return np.zeros((0, 2), dtype=np.int64)
    k = int(rng.binomial(inter_pairs, p))
    if p == 1.0 or k > inter_pairs // 2:
        u, v = np.triu_indices(n, 1)
        keep = block[u] != block[v]
        u, v = u[keep], v[keep]
        pick = np.sort(rng.choice(len(u), size=k, replace=False))
        return np.column_stack([u[pick], v[pick]])
    # uniform k-subset of inter-block pairs by rejection
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < k:
        need = k - len(chosen)
        u = rng.integers(n, size=2 * need + 8)
        v = rng.integers(n, size=2 * need + 8)
        for a, b in zip(u.tolist(), v.tolist()):
            if a == b or block[a] == block[b]:
                continue
            key = (a, b) if a < b else (b, a)
            if key not in chosen:
                chosen.add(key)
                if len(chosen) == k:
                    break
    return np.array(sorted(chosen), dtype=np.int64).reshape(-1, 2)


def synth_planted_partition(spec: PlantedPartitionSpec) -> tuple[Graph, CommunitySet]:
    """Sample a planted-partition graph; ground truth is the list of blocks.

    Node ids are contiguous, block by block.
    """
    sizes = spec.block_sizes
    rng = np.random.default_rng(spec.rng_seed)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    parts = []
    for b, size in enumerate(sizes):
        parts.append(_block_edges(size, spec.p_in, rng) + offsets[b])
    parts.append(_inter_edges(sizes, spec.p_out, rng))
    edges = np.vstack(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    n = int(offsets[-1])
    if len(edges) == 0:
        raise ValueError("planted partition produced an empty graph")
    graph = Graph.from_edges(map(tuple, edges.tolist()), node_count=n)
    blocks = tuple(frozenset(range(int(offsets[b]), int(offsets[b + 1]))) for b in range(len(sizes)))
    truth = CommunitySet(blocks, Source.GROUND_TRUTH, tuple(f"block{b}" for b in range(len(sizes))))
    return graph, truth
