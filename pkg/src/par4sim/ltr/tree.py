"""CART-style regression trees fit to lambda targets with Newton leaf values.

Growth is best-first: the leaf whose best split removes the most squared
error is split next, until the leaf budget is reached or no split with
positive gain and sufficient support exists. Candidate thresholds are the
midpoints between consecutive distinct sorted feature values; inputs with
value <= threshold go left.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np


@dataclass
class RegressionTree:
    """Flat-array tree; feature[i] == -1 marks node i as a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        nodes = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            feats = self.feature[nodes]
            active = feats >= 0
            if not active.any():
                break
            a_rows = rows[active]
            a_nodes = nodes[active]
            go_left = X[a_rows, feats[active]] <= self.threshold[a_nodes]
            nodes[active] = np.where(go_left, self.left[a_nodes], self.right[a_nodes])
        out = self.value[nodes]
        return out[0] if single else out

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegressionTree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            value=np.asarray(data["value"], dtype=np.float64),
        )


def _best_split(X: np.ndarray, targets: np.ndarray, indices: np.ndarray, min_support: int):
    """Best (gain, feature, threshold) over all features for one node, or None."""
    n = len(indices)
    if n < 2 * min_support:
        return None
    t_node = targets[indices]
    total = t_node.sum()
    base = total * total / n
    best_gain = 0.0
    best: tuple[float, int, float] | None = None
    left_sizes = np.arange(1, n)
    for j in range(X.shape[1]):
        col = X[indices, j]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]
        prefix = np.cumsum(t_node[order])[:-1]
        valid = (sorted_col[1:] != sorted_col[:-1]) & (left_sizes >= min_support) & (n - left_sizes >= min_support)
        if not valid.any():
            continue
        gains = prefix**2 / left_sizes + (total - prefix) ** 2 / (n - left_sizes) - base
        gains = np.where(valid, gains, -np.inf)
        p = int(np.argmax(gains))
        if gains[p] > best_gain + 1e-12:
            best_gain = float(gains[p])
            best = (best_gain, j, float((sorted_col[p] + sorted_col[p + 1]) / 2.0))
    return best


def fit_tree(
    X: np.ndarray,
    targets: np.ndarray,
    hessians: np.ndarray,
    num_leaves: int,
    min_leaf_support: int = 1,
    leaf_eps: float = 1e-9,
) -> RegressionTree:
    """Fit one tree to the lambda targets; leaves hold the raw Newton step
    sum(targets) / (sum(hessians) + eps), unshrunk."""
    X = np.asarray(X, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    hessians = np.asarray(hessians, dtype=np.float64)
    if len(X) < 1:
        raise ValueError("need at least one sample")

    feature = [-1]
    threshold = [0.0]
    left = [-1]
    right = [-1]
    node_indices: dict[int, np.ndarray] = {0: np.arange(len(X))}

    heap: list[tuple[float, int, int]] = []
    counter = 0

    def push(node_id: int) -> None:
        nonlocal counter
        split = _best_split(X, targets, node_indices[node_id], min_leaf_support)
        if split is not None:
            heapq.heappush(heap, (-split[0], counter, node_id, split[1], split[2]))
            counter += 1

    push(0)
    n_leaves = 1
    while heap and n_leaves < num_leaves:
        _, _, node_id, feat, thr = heapq.heappop(heap)
        idx = node_indices.pop(node_id)
        go_left = X[idx, feat] <= thr
        left_id = len(feature)
        right_id = left_id + 1
        for _ in range(2):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
        feature[node_id] = feat
        threshold[node_id] = thr
        left[node_id] = left_id
        right[node_id] = right_id
        node_indices[left_id] = idx[go_left]
        node_indices[right_id] = idx[~go_left]
        push(left_id)
        push(right_id)
        n_leaves += 1

    value = np.zeros(len(feature))
    for node_id, idx in node_indices.items():
        value[node_id] = targets[idx].sum() / (hessians[idx].sum() + leaf_eps)

    return RegressionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=value,
    )
