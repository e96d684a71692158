"""NDCG with graded relevance, and the swap delta that drives the lambda
gradients.

Gain is 2^rel - 1 and the position discount is 1/log2(p+1); truncation
keeps only the first k ranks. Score ties everywhere break by ascending item
index so that rankings, deltas, and therefore training runs are fully
deterministic.
"""

from __future__ import annotations

import numpy as np


def dcg_at_k(ranked_relevances, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    rels = np.asarray(ranked_relevances, dtype=np.float64)[:k]
    if len(rels) == 0:
        return 0.0
    positions = np.arange(1, len(rels) + 1)
    return float(np.sum((np.exp2(rels) - 1.0) / np.log2(positions + 1)))


def ndcg_at_k(ranked_relevances, k: int) -> float:
    """NDCG of relevances listed in ranked order; 0.0 when the ideal DCG is 0."""
    rels = np.asarray(ranked_relevances, dtype=np.float64)
    ideal = dcg_at_k(np.sort(rels)[::-1], k)
    if ideal == 0.0:
        return 0.0
    return dcg_at_k(rels, k) / ideal


def rank_positions(scores) -> np.ndarray:
    """1-based rank position of each item under descending score, ties by index."""
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((np.arange(len(scores)), -scores))
    positions = np.empty(len(scores), dtype=np.int64)
    positions[order] = np.arange(1, len(scores) + 1)
    return positions


def ideal_dcg(relevances, k: int) -> float:
    rels = np.asarray(relevances, dtype=np.float64)
    return dcg_at_k(np.sort(rels)[::-1], k)


def delta_ndcg(relevances, scores, i: int, j: int, k: int) -> float:
    """|change in NDCG@k| if items i and j swapped places in the current ranking."""
    if i == j:
        raise ValueError("i and j must differ")
    rels = np.asarray(relevances, dtype=np.float64)
    idcg = ideal_dcg(rels, k)
    if idcg == 0.0:
        return 0.0
    positions = rank_positions(scores)

    def discount(pos: int) -> float:
        return 1.0 / np.log2(pos + 1) if pos <= k else 0.0

    gain_diff = np.exp2(rels[i]) - np.exp2(rels[j])
    disc_diff = discount(int(positions[i])) - discount(int(positions[j]))
    return float(abs(gain_diff * disc_diff) / idcg)
