import math

import numpy as np
import pytest

from commscore.goodness import GoodnessId
from commscore.ranking import (
    RankCurve,
    average_rank_table,
    correlation_matrix,
    cumulative_goodness_curve,
    downsample_grid,
    rank_communities,
    threshold_clusters,
    top_k_by_average_rank,
    upper_bound_curve,
)
from commscore.scoring import ALL_SCORES, Orientation, ScoreId, compute_score


def test_rank_communities():
    assert list(rank_communities([0.3, 0.1, 0.2], Orientation.BETTER_LOW)) == [1, 2, 0]
    assert list(rank_communities([5, 5, 5], Orientation.BETTER_HIGH)) == [0, 1, 2]


def test_rank_g1_conductance(g1):
    comms = [{0, 1, 2}, {0, 1, 2, 3}]
    vals = [compute_score(g1, c, ScoreId.CONDUCTANCE) for c in comms]
    assert vals == pytest.approx([1 / 7, 2 / 10])
    assert list(rank_communities(vals, Orientation.BETTER_LOW)) == [0, 1]


def test_cumulative_curve():
    assert list(cumulative_goodness_curve([0, 1], [1, 0]).cum_avg) == [1.0, 0.5]
    assert list(cumulative_goodness_curve([0, 2, 1], [3.0, 1.0, 2.0]).cum_avg) == [3.0, 2.5, 2.0]
    flat = cumulative_goodness_curve([2, 0, 1], [0.4, 0.4, 0.4]).cum_avg
    assert np.allclose(flat, 0.4)


def test_infinite_goodness_propagates():
    c = cumulative_goodness_curve([1, 0], [1.0, math.inf]).cum_avg
    assert list(c) == [math.inf, math.inf]


def test_upper_bound_curve():
    assert list(upper_bound_curve([1, 0]).cum_avg) == [1.0, 0.5]
    assert list(upper_bound_curve([0, 1]).cum_avg) == [1.0, 0.5]
    assert list(upper_bound_curve([2, 2, 5]).cum_avg) == [5.0, 3.5, 3.0]


def _curve(sid, vals):
    v = np.asarray(vals, dtype=float)
    return RankCurve(sid, np.arange(1, len(v) + 1), v)


def test_average_rank_dominant_and_tied():
    a, b = ScoreId.CONDUCTANCE, ScoreId.TPR
    t = average_rank_table({GoodnessId.DENSITY: {a: _curve(a, [3, 3]), b: _curve(b, [1, 1])}})
    assert list(t.entries[:, 0]) == [1.0, 2.0]
    t = average_rank_table({GoodnessId.DENSITY: {a: _curve(a, [1, 2]), b: _curve(b, [1, 2])}})
    assert list(t.entries[:, 0]) == [1.5, 1.5]


def test_average_rank_crossing():
    a, b = ScoreId.CONDUCTANCE, ScoreId.TPR
    t = average_rank_table({GoodnessId.DENSITY: {a: _curve(a, [4, 4, 1, 1]), b: _curve(b, [2, 2, 2, 2])}})
    assert list(t.entries[:, 0]) == [1.5, 1.5]


def test_average_rank_grid_mismatch():
    a, b = ScoreId.CONDUCTANCE, ScoreId.TPR
    with pytest.raises(ValueError, match="grid"):
        average_rank_table({GoodnessId.DENSITY: {a: _curve(a, [1, 2]), b: _curve(b, [1, 2, 3])}})


def test_correlation_basics():
    x = np.array([1.0, 2.0, 4.0, 3.0])
    ids = [ScoreId.CONDUCTANCE, ScoreId.EXPANSION, ScoreId.TPR]
    m = np.column_stack([x, -x, x])
    c = correlation_matrix(m, ids)
    assert c[0, 0] == 1.0
    assert c[0, 1] == pytest.approx(-1.0)
    # TPR is better-high: the same raw column disagrees with conductance
    assert c[0, 2] == pytest.approx(-1.0)


def test_constant_column_correlates_zero():
    m = np.column_stack([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]])
    c = correlation_matrix(m, [ScoreId.CONDUCTANCE, ScoreId.EXPANSION])
    assert c[0, 1] == 0.0


def test_threshold_clusters():
    assert threshold_clusters(np.eye(13)) == [[i] for i in range(13)]
    assert threshold_clusters(np.ones((13, 13))) == [list(range(13))]
    m = np.full((6, 6), 0.1)
    m[:3, :3] = m[3:, 3:] = 0.9
    assert threshold_clusters(m, 0.6) == [[0, 1, 2], [3, 4, 5]]
    assert threshold_clusters(np.eye(2), 0.6, ["a", "b"]) == [["a"], ["b"]]


def test_top_k():
    ids = [ScoreId.CONDUCTANCE, ScoreId.EXPANSION]
    m = np.array([[0.5, 0.5], [0.1, 0.1], [0.9, 0.9]])
    assert list(top_k_by_average_rank(m, ids, 5)) == [1, 0, 2]
    tie = np.array([[0.1, 0.2], [0.2, 0.1]])
    assert list(top_k_by_average_rank(tie, ids, 2)) == [0, 1]


def test_downsample_grid():
    assert list(downsample_grid(5)) == [0, 1, 2, 3, 4]
    g = downsample_grid(50_000, 100)
    assert g[0] == 0 and g[-1] == 49_999
    assert len(g) <= 100 and np.all(np.diff(g) > 0)


def test_planted_conductance_closer_to_avg_odf_than_modularity():
    from commscore.scoring import score_all
    from commscore.synth import PlantedPartitionSpec, synth_planted_partition

    g, truth = synth_planted_partition(PlantedPartitionSpec(10, 20, 0.5, 0.01, 7))
    ids = list(ALL_SCORES)
    c = correlation_matrix(score_all(g, truth, ids), ids)
    i = ids.index(ScoreId.CONDUCTANCE)
    assert c[i, ids.index(ScoreId.AVG_ODF)] > c[i, ids.index(ScoreId.MODULARITY)]
