"""Gradient-boosted listwise ranker trained on lambda gradients.

Each boosting round recomputes lambdas and Newton weights for every
trainable group, fits one regression tree to the pooled targets, shrinks
its leaf values by the learning rate, and folds the tree's output into the
running scores. Leaves therefore store the already-shrunk step, and
prediction is the plain sum over trees.

Training is deterministic: no subsampling, fixed group order, tie-breaks by
item index all the way down.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..features import Scaler, apply_scaler, fit_scaler
from .groups import RankingGroup
from .lambdas import compute_lambdas
from .tree import RegressionTree, fit_tree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainParams:
    num_trees: int = 300
    num_leaves: int = 10
    learning_rate: float = 0.1
    sigma: float = 1.0
    min_leaf_support: int = 1
    ndcg_truncation: int = 10
    leaf_denominator_epsilon: float = 1e-9

    def __post_init__(self) -> None:
        if self.num_trees < 0:
            raise ValueError("num_trees must be >= 0")
        if self.num_leaves < 2:
            raise ValueError("num_leaves must be >= 2")
        if self.learning_rate <= 0 or self.sigma <= 0:
            raise ValueError("learning_rate and sigma must be positive")
        if self.min_leaf_support < 1 or self.ndcg_truncation < 1:
            raise ValueError("min_leaf_support and ndcg_truncation must be >= 1")

    def to_dict(self) -> dict:
        return {
            "num_trees": self.num_trees,
            "num_leaves": self.num_leaves,
            "learning_rate": self.learning_rate,
            "sigma": self.sigma,
            "min_leaf_support": self.min_leaf_support,
            "ndcg_truncation": self.ndcg_truncation,
            "leaf_denominator_epsilon": self.leaf_denominator_epsilon,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainParams":
        return cls(**data)


@dataclass
class RankerModel:
    trees: list[RegressionTree]
    scaler: Scaler
    params: TrainParams
    trained_on: set[int] = field(default_factory=set)
    worker_scope: str | None = None
    trained_on_hits: set[str] = field(default_factory=set)
    model_id: str = ""


def predict(model: RankerModel, scaled_features: np.ndarray) -> np.ndarray:
    """Score rows of an already-scaled feature matrix (or a single vector)."""
    X = np.asarray(scaled_features, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    scores = np.zeros(len(X))
    for tree in model.trees:
        scores += tree.predict(X)
    return float(scores[0]) if single else scores


def score_raw(model: RankerModel, raw_features: np.ndarray) -> np.ndarray:
    """Scale raw feature rows with the model's scaler, then score them."""
    return predict(model, apply_scaler(model.scaler, raw_features))


def rank(model: RankerModel, group: RankingGroup) -> np.ndarray:
    """Permutation of item indices by descending model score, ties by index."""
    scores = score_raw(model, group.features)
    return np.lexsort((np.arange(len(scores)), -scores))


def train_lambdamart(
    groups: Sequence[RankingGroup],
    params: TrainParams = TrainParams(),
    trained_on: set[int] | None = None,
    worker_scope: str | None = None,
    trained_on_hits: set[str] | None = None,
    model_id: str = "",
    on_round: Callable[[int, np.ndarray], None] | None = None,
) -> RankerModel:
    """Train an ensemble on the trainable subset of `groups` (raw features).

    A min-max scaler is fit on the training rows and stored with the model;
    groups without two distinct relevance grades carry no pairwise signal
    and are dropped before training. `on_round` is invoked after each
    boosting round with the current pooled scores, for training-curve
    inspection.
    """
    trainable = [g for g in groups if g.trainable]
    skipped = len(groups) - len(trainable)
    if skipped:
        logger.info("excluding %d group(s) without graded signal from training", skipped)
    if not trainable:
        raise ValueError("no graded signal: every group has a single relevance level")

    X_raw = np.vstack([g.features for g in trainable])
    scaler = fit_scaler(X_raw)
    X = apply_scaler(scaler, X_raw)

    offsets = np.cumsum([0] + [len(g.relevances) for g in trainable])
    scores = np.zeros(len(X))
    trees: list[RegressionTree] = []

    for round_idx in range(params.num_trees):
        lambdas = np.zeros(len(X))
        hessians = np.zeros(len(X))
        for gi, g in enumerate(trainable):
            lo, hi = offsets[gi], offsets[gi + 1]
            lam, hess = compute_lambdas(
                g.relevances, scores[lo:hi], params.sigma, params.ndcg_truncation
            )
            lambdas[lo:hi] = lam
            hessians[lo:hi] = hess
        tree = fit_tree(
            X,
            lambdas,
            hessians,
            num_leaves=params.num_leaves,
            min_leaf_support=params.min_leaf_support,
            leaf_eps=params.leaf_denominator_epsilon,
        )
        tree.value = tree.value * params.learning_rate
        scores += tree.predict(X)
        trees.append(tree)
        if on_round is not None:
            on_round(round_idx, scores)

    return RankerModel(
        trees=trees,
        scaler=scaler,
        params=params,
        trained_on=set(trained_on or ()),
        worker_scope=worker_scope,
        trained_on_hits=set(trained_on_hits or ()),
        model_id=model_id,
    )


def save_model(model: RankerModel, path: str | Path) -> None:
    doc = {
        "format_version": 1,
        "model_id": model.model_id,
        "params": model.params.to_dict(),
        "scaler": {"mins": list(model.scaler.mins), "maxs": list(model.scaler.maxs)},
        "trained_on": sorted(model.trained_on),
        "trained_on_hits": sorted(model.trained_on_hits),
        "worker_scope": model.worker_scope,
        "trees": [t.to_dict() for t in model.trees],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str | Path) -> RankerModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return RankerModel(
        trees=[RegressionTree.from_dict(t) for t in doc["trees"]],
        scaler=Scaler(mins=tuple(doc["scaler"]["mins"]), maxs=tuple(doc["scaler"]["maxs"])),
        params=TrainParams.from_dict(doc["params"]),
        trained_on=set(doc["trained_on"]),
        worker_scope=doc.get("worker_scope"),
        trained_on_hits=set(doc.get("trained_on_hits", [])),
        model_id=doc.get("model_id", ""),
    )


def empty_model(n_features: int, params: TrainParams = TrainParams(), model_id: str = "") -> RankerModel:
    """An ensemble with no trees: scores everything 0, ranks by input order."""
    scaler = Scaler(mins=(0.0,) * n_features, maxs=(1.0,) * n_features)
    return RankerModel(trees=[], scaler=scaler, params=params, model_id=model_id)
