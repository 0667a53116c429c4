"""Precision/recall/F1 between node sets and Hungarian matching of community lists."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass(frozen=True)
class PrfTriple:
    precision: float
    recall: float
    f1: float


def prf(detected: Iterable[int], truth: Iterable[int]) -> PrfTriple:
    d, t = frozenset(detected), frozenset(truth)
    if not d or not t:
        raise ValueError("precision/recall need non-empty sets")
    hit = len(d & t)
    p, r = hit / len(d), hit / len(t)
    return PrfTriple(p, r, 2 * p * r / (p + r) if p + r > 0 else 0.0)


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]  # (truth index, detected index)
    total_f1: float  # mean over matched pairs
    f1_over_truth: float = 0.0  # same sum divided by the number of truth communities


def hungarian_match(f1_matrix) -> Matching:
    """One-to-one truth/detected assignment maximizing the summed F1."""
    m = np.asarray(f1_matrix, dtype=float)
    if m.size == 0:
        return Matching((), 0.0, 0.0)
    if m.ndim != 2:
        raise ValueError("F1 matrix must be two-dimensional")
    # minimise 1 - F1; rectangular inputs leave the surplus side unmatched
    rows, cols = linear_sum_assignment(1.0 - m)
    pairs = tuple(sorted((int(r), int(c)) for r, c in zip(rows, cols)))
    total = float(sum(m[r, c] for r, c in pairs))
    return Matching(pairs, total / len(pairs), total / m.shape[0])


def f1_matrix(detected: Sequence[Iterable[int]], truth: Sequence[Iterable[int]]) -> np.ndarray:
    return np.array([[prf(d, t).f1 for d in detected] for t in truth]).reshape(len(truth), len(detected))


def eval_seed_run(detected: Sequence[Iterable[int]], truth: Sequence[Iterable[int]]) -> Matching:
    """Match detected communities of one seed against its truth communities."""
    if not truth:
        raise ValueError("no truth communities")
    if not detected:
        return Matching((), 0.0, 0.0)
    return hungarian_match(f1_matrix(detected, truth))
