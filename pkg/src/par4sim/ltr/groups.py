"""Query groups for listwise ranking."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RankingGroup:
    """One query: a feature matrix, graded relevances, and item ids.

    Relevance is a non-negative integer grade, in this system the number of
    workers who chose the item. A group is trainable only if it carries at
    least two distinct grades.
    """

    query_id: str
    features: np.ndarray  # (n_items, n_features) raw feature rows
    relevances: np.ndarray  # (n_items,) non-negative ints
    item_ids: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.relevances = np.asarray(self.relevances, dtype=np.int64)
        if self.features.ndim != 2 or len(self.features) != len(self.relevances):
            raise ValueError(f"group {self.query_id}: features/relevances shape mismatch")
        if len(self.relevances) < 1:
            raise ValueError(f"group {self.query_id}: empty group")
        if (self.relevances < 0).any():
            raise ValueError(f"group {self.query_id}: negative relevance")
        if not self.item_ids:
            self.item_ids = [f"{self.query_id}.{i}" for i in range(len(self.relevances))]

    @property
    def trainable(self) -> bool:
        return len(np.unique(self.relevances)) >= 2
