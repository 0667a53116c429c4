"""Ranking methodology: cumulative goodness curves, average-rank tables,
score correlations, and top-k community selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .goodness import GoodnessId
from .scoring import Orientation, ScoreId

UPPER_BOUND = None  # score_id of the goodness-ordered reference curve
DEFAULT_TAU = 0.6
DEFAULT_TOP_K = 5000


@dataclass(frozen=True, eq=False)
class RankCurve:
    score_id: ScoreId | None
    k_values: np.ndarray
    cum_avg: np.ndarray

    @property
    def label(self) -> str:
        return "U" if self.score_id is None else self.score_id.token


@dataclass(frozen=True, eq=False)
class AvgRankTable:
    rows: tuple[ScoreId, ...]
    columns: tuple[GoodnessId, ...]
    entries: np.ndarray  # rows x columns


def _better_first_key(values, orientation: Orientation) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return -v if orientation is Orientation.BETTER_HIGH else v


def rank_communities(values: Sequence[float], orientation: Orientation) -> np.ndarray:
    """Stable better-first permutation of community indices."""
    return np.argsort(_better_first_key(values, orientation), kind="stable")


def cumulative_goodness_curve(
    ordering: Sequence[int], g: Sequence[float], score_id: ScoreId | None = None
) -> RankCurve:
    """Running mean of ``g`` along ``ordering``.

    An infinite separability makes every prefix containing it infinite.
    """
    ordered = np.asarray(g, dtype=float)[np.asarray(ordering, dtype=np.int64)]
    if len(ordered) != len(g):
        raise ValueError("ordering must be a permutation of the goodness indices")
    k = np.arange(1, len(ordered) + 1)
    return RankCurve(score_id, k, np.cumsum(ordered) / k)


def upper_bound_curve(g: Sequence[float]) -> RankCurve:
    return cumulative_goodness_curve(rank_communities(g, Orientation.BETTER_HIGH), g, UPPER_BOUND)


def score_curves(
    score_matrix: np.ndarray, ids: Sequence[ScoreId], g: Sequence[float]
) -> dict[ScoreId, RankCurve]:
    return {
        sid: cumulative_goodness_curve(rank_communities(score_matrix[:, j], sid.orientation), g, sid)
        for j, sid in enumerate(ids)
    }


def average_rank_table(curves: Mapping[GoodnessId, Mapping[ScoreId, RankCurve]]) -> AvgRankTable:
    """Mean over k of each score's rank (1 = highest cumulative goodness).

    Ties share the mean of their rank positions.
    """
    columns = tuple(curves)
    if not columns:
        raise ValueError("no curves")
    rows = tuple(curves[columns[0]])
    entries = np.zeros((len(rows), len(columns)))
    for j, metric in enumerate(columns):
        per_score = curves[metric]
        if tuple(per_score) != rows:
            raise ValueError("every goodness metric needs the same scores")
        grid = per_score[rows[0]].k_values
        for c in per_score.values():
            if not np.array_equal(c.k_values, grid):
                raise ValueError("curves have mismatched k grids")
        stacked = np.vstack([per_score[s].cum_avg for s in rows])  # scores x k
        ranks = rankdata(-stacked, method="average", axis=0)
        entries[:, j] = ranks.mean(axis=1)
    return AvgRankTable(rows, columns, entries)


def correlation_matrix(score_matrix: np.ndarray, ids: Sequence[ScoreId]) -> np.ndarray:
    """Pearson correlation of oriented score columns.

    Columns are first put on a common lower-is-better axis; a constant column
    correlates 0 with every other column.
    """
    x = np.asarray(score_matrix, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("correlation needs at least two communities")
    sign = np.array([-1.0 if s.orientation is Orientation.BETTER_HIGH else 1.0 for s in ids])
    x = x * sign
    centred = x - x.mean(axis=0)
    norms = np.sqrt((centred**2).sum(axis=0))
    k = x.shape[1]
    corr = np.zeros((k, k))
    live = norms > 0
    if live.any():
        z = centred[:, live] / norms[live]
        corr[np.ix_(live, live)] = np.clip(z.T @ z, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def threshold_clusters(matrix: np.ndarray, tau: float = DEFAULT_TAU, ids: Sequence | None = None) -> list[list]:
    """Connected components of the graph joining entries with correlation >= tau."""
    m = np.asarray(matrix)
    k = m.shape[0]
    labels = list(range(k)) if ids is None else list(ids)
    seen = [False] * k
    groups = []
    for start in range(k):
        if seen[start]:
            continue
        seen[start] = True
        stack, comp = [start], []
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(k):
                if not seen[j] and j != i and m[i, j] >= tau:
                    seen[j] = True
                    stack.append(j)
        groups.append([labels[i] for i in sorted(comp)])
    return groups


def average_ranks(score_matrix: np.ndarray, ids: Sequence[ScoreId]) -> np.ndarray:
    """Per-community mean of better-first (fractional) ranks across the score columns."""
    x = np.asarray(score_matrix, dtype=float)
    if x.shape[1] == 0:
        return np.zeros(x.shape[0])
    ranks = np.column_stack(
        [rankdata(_better_first_key(x[:, j], sid.orientation), method="average") for j, sid in enumerate(ids)]
    )
    return ranks.mean(axis=1)


def top_k_by_average_rank(
    score_matrix: np.ndarray, ids: Sequence[ScoreId], k: int = DEFAULT_TOP_K
) -> np.ndarray:
    """Indices of the ``k`` communities with the best mean rank, best first."""
    mean_rank = average_ranks(score_matrix, ids)
    return np.argsort(mean_rank, kind="stable")[:k]


def downsample_grid(n: int, limit: int = 10_000) -> np.ndarray:
    """0-based positions of a geometric k grid when ``n`` exceeds ``limit``."""
    if n <= limit:
        return np.arange(n)
    pts = np.unique(np.geomspace(1, n, num=limit).round().astype(np.int64))
    return pts - 1
