"""Iteration lifecycle: close, evaluate, retrain, personalize.

Models are always evaluated on an iteration they were not trained on: the
model active during iteration t was trained on iterations strictly below t,
and closing t trains its successor on everything up to and including t.
That separation is asserted on every close.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..hits import HitStore, SpanRef
from ..lm import candidate_sort_key
from ..ltr.letor import read_letor
from ..ltr.metrics import ideal_dcg, ndcg_at_k
from ..ltr.model import RankerModel, TrainParams, rank, save_model, train_lambdamart
from ..pipeline import CandidatePipeline, SpanContext
from .events import EventKind, EventLog, UsageEvent
from .groups import TrainingGroup, build_training_groups

logger = logging.getLogger(__name__)


class IterationError(RuntimeError):
    def __init__(self, message: str, code: str = "conflict"):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    num_groups: int
    mean_ndcg_at_10: float | None
    mean_ndcg_at_10_baseline: float | None
    mean_ndcg_at_10_lm_order: float | None
    model_id: str
    num_untrainable: int = 0
    num_training_groups: int = 0  # cumulative set the new model trained on

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "num_groups": self.num_groups,
            "mean_ndcg_at_10": self.mean_ndcg_at_10,
            "mean_ndcg_at_10_baseline": self.mean_ndcg_at_10_baseline,
            "mean_ndcg_at_10_lm_order": self.mean_ndcg_at_10_lm_order,
            "model_id": self.model_id,
            "num_untrainable": self.num_untrainable,
            "num_training_groups": self.num_training_groups,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IterationRecord":
        return cls(
            iteration=int(data["iteration"]),
            num_groups=int(data["num_groups"]),
            mean_ndcg_at_10=data.get("mean_ndcg_at_10"),
            mean_ndcg_at_10_baseline=data.get("mean_ndcg_at_10_baseline"),
            mean_ndcg_at_10_lm_order=data.get("mean_ndcg_at_10_lm_order"),
            model_id=data["model_id"],
            num_untrainable=int(data.get("num_untrainable", 0)),
            num_training_groups=int(data.get("num_training_groups", 0)),
        )


def evaluate(model: RankerModel, groups: Sequence[TrainingGroup], k: int = 10) -> float | None:
    """Mean NDCG@k of the model's ranking over groups with graded signal.

    Groups whose relevances are all zero have no ideal ranking and are
    excluded from the mean; None when nothing is evaluable.
    """
    values = []
    skipped = 0
    for group in groups:
        rels = group.relevances
        if ideal_dcg(rels, k) == 0:
            skipped += 1
            continue
        order = rank(model, group.as_ranking_group())
        values.append(ndcg_at_k(rels[order], k))
    if skipped:
        logger.debug("evaluate: skipped %d all-zero group(s)", skipped)
    return float(np.mean(values)) if values else None


def lm_order_ndcg(groups: Sequence[TrainingGroup], k: int = 10) -> float | None:
    """Mean NDCG@k of the plain language-model ordering (no ranker)."""
    values = []
    for group in groups:
        rels = group.relevances
        if ideal_dcg(rels, k) == 0:
            continue
        order = sorted(
            range(len(group.items)),
            key=lambda i: candidate_sort_key(
                group.items[i].surface,
                group.items[i].lm_logprob,
                tuple(group.items[i].features[8:12]),
            ),
        )
        values.append(ndcg_at_k(rels[np.array(order)], k))
    return float(np.mean(values)) if values else None


def train_baseline(letor_path: str | Path, params: TrainParams, model_id: str = "baseline") -> RankerModel:
    """Train the generic out-of-domain model from an external ranking dataset."""
    groups = read_letor(letor_path)
    return train_lambdamart(groups, params, trained_on=set(), model_id=model_id)


@dataclass(frozen=True)
class PersonalScore:
    worker_id: str
    iteration: int
    instances: int
    positive_pct: float
    personal_ndcg: float | None
    global_ndcg: float | None


def build_personal_model(
    events: Sequence[UsageEvent],
    worker_id: str,
    span_context_fn: Callable[[str, SpanRef], SpanContext],
    params: TrainParams,
    global_model_for: Callable[[int], RankerModel | None] | None = None,
    k: int = 10,
) -> tuple[RankerModel | None, list[PersonalScore]]:
    """Cumulative per-worker retraining with binary relevance.

    The worker's first participated iteration seeds the initial model; each
    later iteration is scored with the model trained on all of the worker's
    strictly earlier iterations, then folded into the training set.
    """
    participated = sorted(
        {e.iteration for e in events if e.worker_id == worker_id and e.kind == EventKind.SELECT}
    )
    if len(participated) < 2:
        raise ValueError(f"worker {worker_id!r} participated in fewer than 2 iterations")

    model: RankerModel | None = None
    rows: list[PersonalScore] = []
    for idx, current in enumerate(participated[1:], start=1):
        train_iters = set(participated[:idx])
        train_groups = build_training_groups(
            events, train_iters, span_context_fn, binary_for_worker=worker_id
        )
        trainable = [g for g in train_groups if g.trainable]
        if not trainable:
            continue
        model = train_lambdamart(
            [g.as_ranking_group() for g in trainable],
            params,
            trained_on=train_iters,
            trained_on_hits={g.hit_id for g in trainable},
            worker_scope=worker_id,
            model_id=f"personal-{worker_id}-i{max(train_iters):02d}",
        )
        eval_groups = build_training_groups(
            events, {current}, span_context_fn, binary_for_worker=worker_id
        )
        instances = sum(len(g.items) for g in train_groups)
        positive = sum(int(item.relevance > 0) for g in train_groups for item in g.items)
        rows.append(
            PersonalScore(
                worker_id=worker_id,
                iteration=current,
                instances=instances,
                positive_pct=100.0 * positive / instances if instances else 0.0,
                personal_ndcg=evaluate(model, eval_groups, k),
                global_ndcg=evaluate(global_model_for(current), eval_groups, k)
                if global_model_for is not None and global_model_for(current) is not None
                else None,
            )
        )
    return model, rows


class AdaptiveLoop:
    """Event intake plus the close -> evaluate -> retrain -> activate cycle."""

    def __init__(
        self,
        event_log: EventLog,
        hit_store: HitStore,
        pipeline: CandidatePipeline,
        train_params: TrainParams,
        data_dir: str | Path,
        baseline_model: RankerModel | None = None,
        personalization: bool = False,
        personal_params: TrainParams | None = None,
        personal_min_iterations: int = 2,
    ):
        self.event_log = event_log
        self.hit_store = hit_store
        self.pipeline = pipeline
        self.train_params = train_params
        self.data_dir = Path(data_dir)
        self.models_dir = self.data_dir / "models"
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.records_path = self.data_dir / "iterations.jsonl"
        self.baseline_model = baseline_model
        self.personalization = personalization
        self.personal_params = personal_params or train_params
        self.personal_min_iterations = personal_min_iterations

        self.current_iteration = 1
        self.closed: set[int] = set()
        self.records: list[IterationRecord] = []
        self.active_model: RankerModel | None = None
        self.personal_models: dict[str, RankerModel] = {}
        self.separation_checks = 0
        self._restore()

    def _restore(self) -> None:
        if not self.records_path.exists():
            return
        from ..ltr.model import load_model

        with open(self.records_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    self.records.append(IterationRecord.from_dict(json.loads(line)))
        if self.records:
            self.closed = {r.iteration for r in self.records}
            self.current_iteration = max(self.closed) + 1
            last = self.records[-1]
            model_path = self.models_dir / f"{last.model_id}.json"
            if model_path.exists():
                self.active_model = load_model(model_path)

    def span_context(self, hit_id: str, span: SpanRef) -> SpanContext:
        return self.pipeline.span_context(self.hit_store.get(hit_id), span)

    def record_event(self, **fields) -> UsageEvent:
        iteration = fields.get("iteration")
        if iteration in self.closed:
            raise IterationError(f"iteration {iteration} is closed", code="closed")
        if iteration != self.current_iteration:
            raise IterationError(f"iteration {iteration} is not open", code="not_open")
        return self.event_log.append(**fields)

    def build_groups(self, iterations: set[int], binary_for_worker: str | None = None) -> list[TrainingGroup]:
        return build_training_groups(
            self.event_log.events(), iterations, self.span_context, binary_for_worker
        )

    def _assert_separation(self, model: RankerModel, iteration: int) -> None:
        hits_now = self.hit_store.hits_in_iteration(iteration)
        if iteration in model.trained_on or (model.trained_on_hits & hits_now):
            raise IterationError(
                f"train/test separation violated at iteration {iteration}", code="separation"
            )
        self.separation_checks += 1

    def close_iteration(self, t: int) -> IterationRecord:
        if t in self.closed:
            raise IterationError(f"iteration {t} already closed", code="closed")
        if t != self.current_iteration:
            raise IterationError(f"iteration {t} is not the open iteration", code="not_open")

        groups_t = self.build_groups({t})
        if not groups_t:
            raise IterationError(f"no groups in iteration {t}", code="empty")

        adaptive_ndcg = None
        if self.active_model is not None:
            self._assert_separation(self.active_model, t)
            adaptive_ndcg = evaluate(self.active_model, groups_t)
        baseline_ndcg = evaluate(self.baseline_model, groups_t) if self.baseline_model else None
        lm_ndcg = lm_order_ndcg(groups_t)

        cumulative = self.build_groups(set(range(1, t + 1)))
        model_id = f"global-i{t:02d}"
        new_model = train_lambdamart(
            [g.as_ranking_group() for g in cumulative],
            self.train_params,
            trained_on=set(range(1, t + 1)),
            trained_on_hits={g.hit_id for g in cumulative},
            model_id=model_id,
        )
        save_model(new_model, self.models_dir / f"{model_id}.json")

        self.active_model = new_model
        self.closed.add(t)
        self.current_iteration = t + 1

        record = IterationRecord(
            iteration=t,
            num_groups=len(groups_t),
            mean_ndcg_at_10=adaptive_ndcg,
            mean_ndcg_at_10_baseline=baseline_ndcg,
            mean_ndcg_at_10_lm_order=lm_ndcg,
            model_id=model_id,
            num_untrainable=sum(1 for g in groups_t if not g.trainable),
            num_training_groups=len(cumulative),
        )
        self.records.append(record)
        with open(self.records_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_dict()) + "\n")
        logger.info(
            "closed iteration %d: %d groups, adaptive=%s lm_order=%s",
            t,
            record.num_groups,
            record.mean_ndcg_at_10,
            record.mean_ndcg_at_10_lm_order,
        )
        if self.personalization:
            self._rebuild_personal_models()
        return record

    def _rebuild_personal_models(self) -> None:
        events = self.event_log.events()
        by_worker: dict[str, set[int]] = {}
        for e in events:
            if e.kind == EventKind.SELECT and e.iteration in self.closed:
                by_worker.setdefault(e.worker_id, set()).add(e.iteration)
        for worker_id, iterations in by_worker.items():
            if len(iterations) < self.personal_min_iterations:
                continue
            groups = build_training_groups(
                events, iterations, self.span_context, binary_for_worker=worker_id
            )
            trainable = [g.as_ranking_group() for g in groups if g.trainable]
            if not trainable:
                continue
            self.personal_models[worker_id] = train_lambdamart(
                trainable,
                self.personal_params,
                trained_on=iterations,
                trained_on_hits={g.hit_id for g in groups if g.trainable},
                worker_scope=worker_id,
                model_id=f"personal-{worker_id}-i{max(iterations):02d}",
            )

    def model_for_worker(self, worker_id: str | None) -> RankerModel | None:
        if self.personalization and worker_id and worker_id in self.personal_models:
            return self.personal_models[worker_id]
        return self.active_model

    def curve_rows(self) -> list[tuple]:
        return [
            (
                r.iteration,
                r.mean_ndcg_at_10,
                r.mean_ndcg_at_10_baseline,
                r.mean_ndcg_at_10_lm_order,
            )
            for r in self.records
        ]

    def write_curve_csv(self, path: str | Path) -> None:
        def fmt(value: float | None) -> str:
            return "" if value is None else f"{value:.6f}"

        with open(path, "w", encoding="utf-8") as fh:
            fh.write("iteration,adaptive,baseline,lm_order\n")
            for iteration, adaptive, baseline, lm in self.curve_rows():
                fh.write(f"{iteration},{fmt(adaptive)},{fmt(baseline)},{fmt(lm)}\n")
