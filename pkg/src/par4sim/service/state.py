"""Service core: wires config, stores, pipeline, and the adaptive loop.

The core owns all mutable state behind one lock. Candidate snapshots are
registered per (hit, span, model) so that selection events can be verified
against a list the service actually served; the registered snapshot id goes
stale as soon as the iteration closes and a new model takes over.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..adaptive.events import REPLACEMENT_KINDS, EventKind, EventLog, UsageEvent
from ..adaptive.loop import AdaptiveLoop, IterationError, train_baseline
from ..config import AppConfig
from ..features import apply_scaler
from ..hits import Hit, HitStore, Sentence, SpanRef
from ..lm import load_corpus
from ..ltr.model import predict
from ..pipeline import CandidatePipeline, ServedCandidate
from ..resources import ResourceBundle, load_embeddings, load_ppdb, load_thesaurus
from ..textkit import FrequencyTable


class ServiceError(RuntimeError):
    def __init__(self, status_code: int, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


@dataclass(frozen=True)
class SnapshotRecord:
    snapshot_id: str
    hit_id: str
    span: SpanRef
    iteration: int
    model_id: str | None
    surfaces: tuple[str, ...]


def load_bundle(config: AppConfig) -> ResourceBundle:
    paths = config.resources
    lemma_dict = None
    if paths.lemma_dict:
        with open(paths.lemma_dict, encoding="utf-8") as fh:
            lemma_dict = {
                line.split("\t")[0]: line.split("\t")[1].strip()
                for line in fh
                if line.strip() and not line.startswith("#")
            }
    return ResourceBundle(
        lexical=load_thesaurus(paths.lexical_thesaurus, "lexical"),
        distributional=load_thesaurus(paths.distributional_thesaurus, "distributional"),
        ppdb=load_ppdb(paths.ppdb),
        embeddings=load_embeddings(paths.embeddings),
        freq_simple=FrequencyTable.load(paths.freq_simple_corpus, "simple-corpus"),
        freq_web=FrequencyTable.load(paths.freq_web_corpus, "web-corpus"),
        lemma_dict=lemma_dict,
    )


class ServiceCore:
    def __init__(self, config: AppConfig):
        self.config = config
        data_dir = Path(config.data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)

        self.bundle = load_bundle(config)
        self.lm = load_corpus(config.lm.corpus, config.lm.weights)
        self.pipeline = CandidatePipeline(
            self.bundle,
            self.lm,
            cap=config.service.candidate_cap,
            per_resource_k=config.service.per_resource_k,
            min_logprob=config.lm.min_logprob,
        )
        self.hit_store = HitStore(data_dir / "hits.jsonl")
        self.event_log = EventLog(data_dir / "events.jsonl")
        baseline = None
        if config.baseline_letor:
            baseline = train_baseline(config.baseline_letor, config.train)
        self.loop = AdaptiveLoop(
            event_log=self.event_log,
            hit_store=self.hit_store,
            pipeline=self.pipeline,
            train_params=config.train,
            data_dir=data_dir,
            baseline_model=baseline,
            personalization=config.service.personalization,
            personal_min_iterations=config.service.personal_min_iterations,
        )

        self.lock = threading.RLock()
        self._closing = False
        self._snapshots: dict[str, SnapshotRecord] = {}
        self._snapshot_keys: dict[tuple, str] = {}
        self._worker_spans: dict[tuple[str, str], list[SpanRef]] = {}
        self._replacements: dict[tuple[str, str], int] = {}
        self._rebuild_from_log()

    def _rebuild_from_log(self) -> None:
        for event in self.event_log.events():
            if event.kind in REPLACEMENT_KINDS:
                key = (event.hit_id, event.worker_id)
                self._replacements[key] = self._replacements.get(key, 0) + 1
            elif event.kind == EventKind.ADD_CP and event.span is not None:
                self._worker_spans.setdefault((event.hit_id, event.worker_id), []).append(event.span)

    # -- HITs ---------------------------------------------------------------

    def create_hit(self, iteration: int, sentences: list[tuple[str, str]], spans: list[SpanRef], assigned_workers: int) -> Hit:
        with self.lock:
            if iteration in self.loop.closed:
                raise ServiceError(409, f"iteration {iteration} is closed")
            if iteration != self.loop.current_iteration:
                raise ServiceError(409, f"iteration {iteration} is not open")
            n = len(sentences)
            lo, hi = self.config.service.min_hit_sentences, self.config.service.max_hit_sentences
            if not (lo <= n <= hi):
                raise ServiceError(400, f"HIT must contain {lo}..{hi} sentences, got {n}")
            hit = Hit(
                hit_id=self.hit_store.next_id(),
                iteration=iteration,
                sentences=tuple(Sentence(id=sid, text=text) for sid, text in sentences),
                gold_spans=tuple(spans),
                assigned_workers=assigned_workers,
            )
            try:
                self.hit_store.add(hit)
            except ValueError as exc:
                raise ServiceError(400, str(exc)) from exc
            return hit

    def get_hit(self, hit_id: str) -> Hit:
        if hit_id not in self.hit_store:
            raise ServiceError(404, f"unknown hit {hit_id!r}")
        return self.hit_store.get(hit_id)

    def worker_spans(self, hit_id: str, worker_id: str | None) -> list[SpanRef]:
        if not worker_id:
            return []
        return list(self._worker_spans.get((hit_id, worker_id), []))

    def _known_span(self, hit: Hit, span: SpanRef, worker_id: str | None) -> bool:
        return span in hit.gold_spans or span in self.worker_spans(hit.hit_id, worker_id)

    # -- Candidates ---------------------------------------------------------

    def candidates(self, hit_id: str, span: SpanRef, worker_id: str | None):
        hit = self.get_hit(hit_id)
        if not self._known_span(hit, span, worker_id):
            raise ServiceError(404, f"span {span} is not a known CP of {hit_id}")
        with self.lock:
            entries = self.pipeline.served_entries(hit, span)
            model = self.loop.model_for_worker(worker_id)
            scores: list[float | None]
            if model is not None and model.trees and entries:
                raw = np.vstack([e.features for e in entries])
                model_scores = predict(model, apply_scaler(model.scaler, raw))
                order = np.lexsort((np.arange(len(entries)), -model_scores))
                entries = [entries[i] for i in order]
                scores = [float(model_scores[i]) for i in order]
                model_id = model.model_id
            else:
                scores = [None] * len(entries)
                model_id = model.model_id if model is not None else None
            snapshot_id = self._register_snapshot(hit, span, model_id, worker_id, entries)
            return snapshot_id, hit.cp_surface(span), model_id, entries, scores

    def _register_snapshot(
        self,
        hit: Hit,
        span: SpanRef,
        model_id: str | None,
        worker_id: str | None,
        entries: list[ServedCandidate],
    ) -> str:
        scope = worker_id if self.config.service.personalization else None
        key = (hit.hit_id, span, model_id, scope)
        existing = self._snapshot_keys.get(key)
        if existing:
            return existing
        snapshot_id = f"snap{len(self._snapshots):06d}"
        record = SnapshotRecord(
            snapshot_id=snapshot_id,
            hit_id=hit.hit_id,
            span=span,
            iteration=hit.iteration,
            model_id=model_id,
            surfaces=tuple(e.surface for e in entries),
        )
        self._snapshots[snapshot_id] = record
        self._snapshot_keys[key] = snapshot_id
        return snapshot_id

    # -- Events ---------------------------------------------------------------

    def post_event(self, payload: dict) -> UsageEvent:
        with self.lock:
            if self._closing:
                raise ServiceError(409, "iteration close in progress, retry")
            kind = EventKind(payload["kind"])
            hit_id = payload["hit_id"]
            hit = self.get_hit(hit_id)
            span = payload.get("span")
            worker_id = payload["worker_id"]

            if kind in (EventKind.SELECT, EventKind.DO_NOT_CHANGE):
                self._validate_snapshot_echo(payload)
            if kind == EventKind.ADD_CP:
                self._validate_new_span(hit, span, worker_id)
            if kind == EventKind.SUBMIT:
                done = self._replacements.get((hit_id, worker_id), 0)
                if done < self.config.service.submit_threshold:
                    raise ServiceError(
                        409,
                        f"submit gate: {done} replacement(s) below threshold "
                        f"{self.config.service.submit_threshold}",
                    )
            try:
                event = self.loop.record_event(
                    worker_id=worker_id,
                    hit_id=hit_id,
                    iteration=payload["iteration"],
                    kind=kind,
                    span=span,
                    chosen_surface=payload.get("chosen_surface"),
                    candidate_list_snapshot=payload.get("candidate_list_snapshot"),
                    snapshot_id=payload.get("snapshot_id"),
                    comment=payload.get("comment"),
                )
            except IterationError as exc:
                raise ServiceError(409, str(exc)) from exc
            except ValueError as exc:
                raise ServiceError(400, str(exc)) from exc

            if kind in REPLACEMENT_KINDS:
                key = (hit_id, worker_id)
                self._replacements[key] = self._replacements.get(key, 0) + 1
            elif kind == EventKind.ADD_CP:
                self._worker_spans.setdefault((hit_id, worker_id), []).append(span)
            return event

    def _validate_snapshot_echo(self, payload: dict) -> None:
        snapshot_id = payload.get("snapshot_id")
        if not snapshot_id:
            raise ServiceError(400, "select/do_not_change events must echo a snapshot_id")
        record = self._snapshots.get(snapshot_id)
        if record is None:
            raise ServiceError(409, f"unknown snapshot {snapshot_id!r}")
        if record.iteration != self.loop.current_iteration:
            raise ServiceError(409, f"stale snapshot {snapshot_id!r}: iteration closed")
        span = payload.get("span")
        if record.hit_id != payload["hit_id"] or (span is not None and record.span != span):
            raise ServiceError(409, f"snapshot {snapshot_id!r} does not match the event span")
        echoed = payload.get("candidate_list_snapshot")
        if echoed is None:
            payload["candidate_list_snapshot"] = record.surfaces
        elif tuple(echoed) != record.surfaces:
            raise ServiceError(409, f"snapshot {snapshot_id!r} list mismatch")

    def _validate_new_span(self, hit: Hit, span: SpanRef | None, worker_id: str) -> None:
        if span is None:
            raise ServiceError(400, "add_cp requires a span")
        try:
            text = hit.sentence(span.sentence_id).text
        except KeyError as exc:
            raise ServiceError(400, str(exc)) from exc
        if not (0 <= span.start < span.end <= len(text)):
            raise ServiceError(400, f"span {span} outside sentence")
        for existing in list(hit.gold_spans) + self.worker_spans(hit.hit_id, worker_id):
            if existing.sentence_id == span.sentence_id and not (
                span.end <= existing.start or span.start >= existing.end
            ):
                raise ServiceError(400, f"span {span} overlaps an existing CP span")

    # -- Iterations -----------------------------------------------------------

    def close_iteration(self, t: int):
        # Event intake is refused (409, retry) while the close runs; the
        # model reference is swapped in one assignment, so in-flight
        # candidate requests see exactly one model version.
        with self.lock:
            if self._closing:
                raise ServiceError(409, "iteration close in progress, retry")
            self._closing = True
        try:
            return self.loop.close_iteration(t)
        except IterationError as exc:
            status = 409 if exc.code in ("closed", "not_open", "separation", "empty") else 400
            raise ServiceError(status, str(exc)) from exc
        finally:
            with self.lock:
                self._closing = False

    def metrics_csv(self) -> str:
        lines = ["iteration,adaptive,baseline,lm_order"]

        def fmt(value):
            return "" if value is None else f"{value:.6f}"

        for iteration, adaptive, baseline, lm in self.loop.curve_rows():
            lines.append(f"{iteration},{fmt(adaptive)},{fmt(baseline)},{fmt(lm)}")
        return "\n".join(lines) + "\n"
