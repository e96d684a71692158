from .groups import RankingGroup
from .letor import read_letor, write_letor
from .metrics import delta_ndcg, ndcg_at_k, rank_positions
from .model import (
    RankerModel,
    TrainParams,
    load_model,
    predict,
    rank,
    save_model,
    train_lambdamart,
)
from .tree import RegressionTree, fit_tree

__all__ = [
    "RankingGroup",
    "RankerModel",
    "TrainParams",
    "RegressionTree",
    "ndcg_at_k",
    "delta_ndcg",
    "rank_positions",
    "fit_tree",
    "train_lambdamart",
    "predict",
    "rank",
    "save_model",
    "load_model",
    "read_letor",
    "write_letor",
]
