"""REST facade over the service core."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Header, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from ..config import AppConfig
from ..hits import SpanRef
from .schemas import (
    CandidateListOut,
    CandidateOut,
    EventAck,
    EventIn,
    HitCreate,
    HitCreated,
    HitView,
    IterationRecordOut,
    MetricsOut,
    SpanIn,
)
from .state import ServiceCore, ServiceError


def _span_ref(span: SpanIn) -> SpanRef:
    return SpanRef(sentence_id=span.sentence_id, start=span.start, end=span.end)


def create_app(
    config: AppConfig,
    core: ServiceCore | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="par4sim", version="0.1.0")
    app.state.core = core or ServiceCore(config)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ServiceError)
    async def service_error_handler(_request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    def get_core() -> ServiceCore:
        return app.state.core

    @app.get("/api/health")
    def health():
        core = get_core()
        return {"status": "ok", "current_iteration": core.loop.current_iteration}

    @app.post("/api/hits", response_model=HitCreated, status_code=201)
    def create_hit(payload: HitCreate):
        core = get_core()
        hit = core.create_hit(
            iteration=payload.iteration,
            sentences=[(s.id, s.text) for s in payload.sentences],
            spans=[_span_ref(s) for s in payload.cp_spans],
            assigned_workers=payload.assigned_workers,
        )
        return HitCreated(hit_id=hit.hit_id)

    @app.get("/api/hits/{hit_id}", response_model=HitView)
    def get_hit(
        hit_id: str,
        worker: str | None = Query(default=None),
        x_worker_id: str | None = Header(default=None),
    ):
        core = get_core()
        worker = worker or x_worker_id
        hit = core.get_hit(hit_id)
        return HitView(
            hit_id=hit.hit_id,
            iteration=hit.iteration,
            sentences=[{"id": s.id, "text": s.text} for s in hit.sentences],
            gold_spans=[s.to_dict() for s in hit.gold_spans],
            worker_spans=[s.to_dict() for s in core.worker_spans(hit_id, worker)],
            assigned_workers=hit.assigned_workers,
            submit_threshold=core.config.service.submit_threshold,
        )

    @app.get("/api/hits/{hit_id}/candidates", response_model=CandidateListOut)
    def get_candidates(
        hit_id: str,
        sentence: str = Query(...),
        start: int = Query(..., ge=0),
        end: int = Query(..., ge=1),
        worker: str | None = Query(default=None),
        x_worker_id: str | None = Header(default=None),
    ):
        core = get_core()
        worker = worker or x_worker_id
        span = SpanRef(sentence_id=sentence, start=start, end=end)
        snapshot_id, cp_surface, model_id, entries, scores = core.candidates(hit_id, span, worker)
        return CandidateListOut(
            snapshot_id=snapshot_id,
            hit_id=hit_id,
            sentence_id=sentence,
            start=start,
            end=end,
            cp_surface=cp_surface,
            model_id=model_id,
            candidates=[
                CandidateOut(
                    surface=e.surface,
                    sources=list(e.sources),
                    lm_logprob=e.lm_logprob,
                    model_score=score,
                    features=[float(v) for v in e.features],
                )
                for e, score in zip(entries, scores)
            ],
        )

    @app.post("/api/events", response_model=EventAck, status_code=201)
    def post_event(payload: EventIn):
        core = get_core()
        data = payload.model_dump()
        if payload.span is not None:
            data["span"] = _span_ref(payload.span)
        if payload.candidate_list_snapshot is not None:
            data["candidate_list_snapshot"] = tuple(payload.candidate_list_snapshot)
        event = core.post_event(data)
        return EventAck(event_id=event.event_id)

    @app.post("/api/iterations/{t}/close", response_model=IterationRecordOut)
    def close_iteration(t: int):
        core = get_core()
        record = core.close_iteration(t)
        return IterationRecordOut(**record.to_dict())

    @app.get("/api/metrics", response_model=None)
    def metrics(format: str = Query(default="json")):
        core = get_core()
        if format == "csv":
            return PlainTextResponse(core.metrics_csv(), media_type="text/csv")
        return MetricsOut(
            records=[IterationRecordOut(**r.to_dict()) for r in core.loop.records],
            current_iteration=core.loop.current_iteration,
        )

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
