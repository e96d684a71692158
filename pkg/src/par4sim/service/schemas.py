"""Request/response models for the REST API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SentenceIn(BaseModel):
    id: str
    text: str


class SpanIn(BaseModel):
    sentence_id: str
    start: int = Field(ge=0)
    end: int = Field(ge=1)


class HitCreate(BaseModel):
    iteration: int = Field(ge=1)
    sentences: list[SentenceIn]
    cp_spans: list[SpanIn]
    assigned_workers: int = 10


class HitCreated(BaseModel):
    hit_id: str


class HitView(BaseModel):
    hit_id: str
    iteration: int
    sentences: list[SentenceIn]
    gold_spans: list[SpanIn]
    worker_spans: list[SpanIn]
    assigned_workers: int
    submit_threshold: int


class CandidateOut(BaseModel):
    surface: str
    sources: list[str]
    lm_logprob: float
    model_score: float | None
    features: list[float]


class CandidateListOut(BaseModel):
    snapshot_id: str
    hit_id: str
    sentence_id: str
    start: int
    end: int
    cp_surface: str
    model_id: str | None
    candidates: list[CandidateOut]


class EventIn(BaseModel):
    worker_id: str
    hit_id: str
    iteration: int
    kind: str
    span: SpanIn | None = None
    chosen_surface: str | None = None
    candidate_list_snapshot: list[str] | None = None
    snapshot_id: str | None = None
    comment: str | None = None


class EventAck(BaseModel):
    event_id: int


class IterationRecordOut(BaseModel):
    iteration: int
    num_groups: int
    mean_ndcg_at_10: float | None
    mean_ndcg_at_10_baseline: float | None
    mean_ndcg_at_10_lm_order: float | None
    model_id: str
    num_untrainable: int
    num_training_groups: int


class MetricsOut(BaseModel):
    records: list[IterationRecordOut]
    current_iteration: int
