"""Randomized community perturbations and the Z-score robustness protocol."""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import CommunitySet, Graph
from .scoring import Orientation, ScoreId, compute_score

log = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-12
DEFAULT_TRIALS = 20
SMALL_P, LARGE_P = 0.05, 0.2


class Strategy(enum.Enum):
    NODE_SWAP = "nodeswap"
    RANDOM = "random"
    EXPAND = "expand"
    SHRINK = "shrink"

    @classmethod
    def parse(cls, token: str) -> "Strategy":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown strategy {token!r}; choose from {', '.join(s.value for s in cls)}"
            ) from None


@dataclass(frozen=True)
class PerturbSpec:
    strategy: Strategy
    intensity: float
    trials: int = DEFAULT_TRIALS
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.intensity <= 1:
            raise ValueError("intensity must lie in (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be positive")


@dataclass(frozen=True)
class Perturbed:
    members: frozenset
    steps: int
    skipped: int


def _boundary_edges(graph: Graph, members: set) -> list[tuple[int, int]]:
    adj = graph.adjacency
    return [(u, v) for u in sorted(members) for v in adj[u] if v not in members]


def _random_outsider(graph: Graph, members: set, rng: np.random.Generator) -> int:
    n = graph.node_count
    if len(members) * 2 <= n:
        while True:
            v = int(rng.integers(n))
            if v not in members:
                return v
    outside = [v for v in range(n) if v not in members]
    return outside[int(rng.integers(len(outside)))]


def perturb(
    graph: Graph,
    s,
    strategy: Strategy,
    p: float,
    rng: np.random.Generator,
) -> Perturbed:
    """Apply ``ceil(p * |S|)`` atomic steps of ``strategy`` to a copy of ``s``.

    Steps that cannot be executed (no boundary edge, no outsider, or a shrink
    that would empty the set) are skipped and counted.
    """
    if not 0 < p <= 1:
        raise ValueError("intensity must lie in (0, 1]")
    members = set(s)
    if not members:
        raise ValueError("cannot perturb an empty set")
    steps = math.ceil(p * len(members))
    skipped = 0
    n = graph.node_count
    for _ in range(steps):
        if strategy is Strategy.RANDOM:
            if len(members) == n:
                skipped += 1
                continue
            inside = sorted(members)
            u = inside[int(rng.integers(len(inside)))]
            v = _random_outsider(graph, members, rng)
            members.remove(u)
            members.add(v)
            continue
        boundary = _boundary_edges(graph, members)
        if not boundary:
            skipped += 1
            continue
        u, v = boundary[int(rng.integers(len(boundary)))]
        if strategy is Strategy.NODE_SWAP:
            members.remove(u)
            members.add(v)
        elif strategy is Strategy.EXPAND:
            members.add(v)
        elif strategy is Strategy.SHRINK:
            if len(members) == 1:
                skipped += 1
                continue
            members.remove(u)
        else:
            raise ValueError(strategy)
    return Perturbed(frozenset(members), steps, skipped)


def trial_rng(rng_seed: int, community: int, trial: int) -> np.random.Generator:
    """Independent stream per (community, trial), fixed by the base seed."""
    return np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(community, trial)))


def higher_is_better(score_id: ScoreId, value: float) -> float:
    return value if score_id.orientation is Orientation.BETTER_HIGH else -value


@dataclass(frozen=True)
class ZScoreReport:
    score_id: ScoreId
    spec: PerturbSpec
    z: float
    mean_true: float
    mean_perturbed: float
    variance_perturbed: float
    communities_used: int
    degenerate: bool
    skipped_steps: int = 0


def zscore_from_values(true_values: Sequence[float], perturbed_means: Sequence[float]):
    """``(z, mean_true, mean_perturbed, variance, degenerate)`` for paired per-community values.

    ``z = mean(true - perturbed) / sqrt(var(perturbed))`` with the unbiased
    sample variance; z is 0 and ``degenerate`` set when the variance is
    below the floor.
    """
    t = np.asarray(true_values, dtype=float)
    q = np.asarray(perturbed_means, dtype=float)
    if len(t) != len(q) or len(t) < 2:
        raise ValueError("need at least two paired communities")
    var = float(np.var(q, ddof=1))
    mean_t, mean_q = float(t.mean()), float(q.mean())
    if var < VARIANCE_FLOOR:
        return 0.0, mean_t, mean_q, var, True
    return float(np.mean(t - q)) / math.sqrt(var), mean_t, mean_q, var, False


def _community_trials(graph, idx, members, score_id, spec):
    true = higher_is_better(score_id, compute_score(graph, members, score_id))
    vals, skipped = [], 0
    for t in range(spec.trials):
        out = perturb(graph, members, spec.strategy, spec.intensity, trial_rng(spec.rng_seed, idx, t))
        skipped += out.skipped
        vals.append(higher_is_better(score_id, compute_score(graph, out.members, score_id)))
    return true, math.fsum(vals) / len(vals), skipped


def zscore(
    graph: Graph,
    cs: CommunitySet | Sequence[frozenset],
    score_id: ScoreId,
    spec: PerturbSpec,
    threads: int = 1,
) -> ZScoreReport:
    """Robustness of ``score_id`` to ``spec.strategy`` at ``spec.intensity``.

    Scores are put on a higher-is-better axis so that degrading a community
    yields a positive Z.
    """
    comms = list(cs)
    if len(comms) < 2:
        raise ValueError("Z-score needs at least two communities")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(
            pool.map(
                lambda item: _community_trials(graph, item[0], item[1], score_id, spec),
                enumerate(comms),
            )
        )
    true = [r[0] for r in rows]
    pert = [r[1] for r in rows]
    z, mt, mp, var, degenerate = zscore_from_values(true, pert)
    return ZScoreReport(
        score_id, spec, z, mt, mp, var, len(comms), degenerate, sum(r[2] for r in rows)
    )


@dataclass(frozen=True)
class ZIncrement:
    value: float
    low: ZScoreReport
    high: ZScoreReport

    @property
    def degenerate(self) -> bool:
        return self.low.degenerate or self.high.degenerate

    def __float__(self) -> float:
        return self.value


def zscore_increment(
    graph: Graph,
    cs: CommunitySet | Sequence[frozenset],
    score_id: ScoreId,
    strategy: Strategy,
    rng_seed: int = 0,
    trials: int = DEFAULT_TRIALS,
    threads: int = 1,
) -> ZIncrement:
    """``Z(p=0.2) - Z(p=0.05)`` with both ends driven by the same seed."""
    low = zscore(graph, cs, score_id, PerturbSpec(strategy, SMALL_P, trials, rng_seed), threads)
    high = zscore(graph, cs, score_id, PerturbSpec(strategy, LARGE_P, trials, rng_seed), threads)
    inc = ZIncrement(high.z - low.z, low, high)
    if inc.degenerate:
        log.warning("degenerate Z-score for %s/%s", score_id.token, strategy.value)
    return inc
