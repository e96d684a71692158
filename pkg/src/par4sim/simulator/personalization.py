"""Per-worker model trajectories built offline from a finished campaign.

Replays the campaign's event log with binary relevance per worker,
retraining cumulatively, and compares each personal model against the
global model that was active in the same iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from ..adaptive.events import EventKind, EventLog
from ..adaptive.loop import PersonalScore, build_personal_model
from ..config import AppConfig
from ..hits import HitStore
from ..lm import load_corpus
from ..ltr.model import TrainParams, load_model
from ..pipeline import CandidatePipeline
from ..service.state import load_bundle

logger = logging.getLogger(__name__)


@dataclass
class PersonalizationResult:
    rows: list[PersonalScore]
    csv_path: Path
    wins: dict[str, bool]  # worker -> personal mean beat global mean

    @property
    def win_count(self) -> int:
        return sum(1 for won in self.wins.values() if won)


@dataclass
class CampaignContext:
    """Offline view of a finished campaign: events, hits, feature recompute."""

    app_config: AppConfig
    events: list
    hit_store: HitStore
    pipeline: CandidatePipeline

    def span_context(self, hit_id, span):
        return self.pipeline.span_context(self.hit_store.get(hit_id), span)


def load_campaign_context(out_dir: str | Path) -> CampaignContext:
    out = Path(out_dir)
    app_config = AppConfig.from_file(out / "config.json")
    data_dir = Path(app_config.data_dir)
    bundle = load_bundle(app_config)
    lm = load_corpus(app_config.lm.corpus, app_config.lm.weights)
    pipeline = CandidatePipeline(
        bundle,
        lm,
        cap=app_config.service.candidate_cap,
        per_resource_k=app_config.service.per_resource_k,
        min_logprob=app_config.lm.min_logprob,
    )
    return CampaignContext(
        app_config=app_config,
        events=EventLog(data_dir / "events.jsonl").events(),
        hit_store=HitStore(data_dir / "hits.jsonl"),
        pipeline=pipeline,
    )


def run_personalization(
    out_dir: str | Path,
    top_k: int = 10,
    personal_params: TrainParams | None = None,
    k: int = 10,
) -> PersonalizationResult:
    out = Path(out_dir)
    context = load_campaign_context(out)
    app_config = context.app_config
    data_dir = Path(app_config.data_dir)
    events = context.events
    span_context = context.span_context
    params = personal_params or TrainParams(num_trees=100)

    models_dir = data_dir / "models"
    model_cache: dict[int, object] = {}

    def global_model_for(iteration: int):
        # the model serving iteration t was trained through t-1
        trained_through = iteration - 1
        if trained_through < 1:
            return None
        if trained_through not in model_cache:
            path = models_dir / f"global-i{trained_through:02d}.json"
            model_cache[trained_through] = load_model(path) if path.exists() else None
        return model_cache[trained_through]

    select_counts: dict[str, int] = {}
    participated: dict[str, set[int]] = {}
    for event in events:
        if event.kind == EventKind.SELECT:
            select_counts[event.worker_id] = select_counts.get(event.worker_id, 0) + 1
            participated.setdefault(event.worker_id, set()).add(event.iteration)

    eligible = [w for w, iters in participated.items() if len(iters) >= 2]
    if len(eligible) < top_k:
        raise ValueError(f"only {len(eligible)} eligible workers, need {top_k}")
    ranked = sorted(eligible, key=lambda w: (-select_counts[w], w))[:top_k]

    rows: list[PersonalScore] = []
    wins: dict[str, bool] = {}
    for worker_id in ranked:
        _model, worker_rows = build_personal_model(
            events, worker_id, span_context, params, global_model_for=global_model_for, k=k
        )
        rows.extend(worker_rows)
        scored = [
            r for r in worker_rows if r.personal_ndcg is not None and r.global_ndcg is not None
        ]
        if scored:
            personal_mean = sum(r.personal_ndcg for r in scored) / len(scored)
            global_mean = sum(r.global_ndcg for r in scored) / len(scored)
            wins[worker_id] = personal_mean > global_mean
        else:
            wins[worker_id] = False
        logger.info("worker %s: %d trajectory points, wins=%s", worker_id, len(worker_rows), wins[worker_id])

    csv_path = out / "personal.csv"

    def fmt(value):
        return "" if value is None else f"{value:.6f}"

    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("worker_id,iteration,instances,positive_pct,personal,global\n")
        for r in rows:
            fh.write(
                f"{r.worker_id},{r.iteration},{r.instances},{r.positive_pct:.2f},"
                f"{fmt(r.personal_ndcg)},{fmt(r.global_ndcg)}\n"
            )
    return PersonalizationResult(rows=rows, csv_path=csv_path, wins=wins)
