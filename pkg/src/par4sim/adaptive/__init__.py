from .events import EventKind, EventLog, UsageEvent
from .groups import TrainingGroup, build_training_groups, final_selections
from .loop import (
    AdaptiveLoop,
    IterationError,
    IterationRecord,
    build_personal_model,
    evaluate,
    lm_order_ndcg,
    train_baseline,
)

__all__ = [
    "EventKind",
    "EventLog",
    "UsageEvent",
    "TrainingGroup",
    "build_training_groups",
    "final_selections",
    "AdaptiveLoop",
    "IterationError",
    "IterationRecord",
    "build_personal_model",
    "evaluate",
    "lm_order_ndcg",
    "train_baseline",
]
