"""Drive the full service with a synthetic crowd, end to end over HTTP.

Each iteration serves fresh HITs (disjoint from every earlier iteration),
has every worker complete every HIT through the REST API, then closes the
iteration, which evaluates the active model and retrains. The whole run is
deterministic under its master seed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from ..adaptive.loop import IterationRecord
from ..config import AppConfig, LmSettings, ResourcePaths, ServiceSettings
from ..hits import HitStore, SpanRef
from ..lm import load_corpus
from ..ltr.groups import RankingGroup
from ..ltr.letor import write_letor
from ..ltr.model import TrainParams
from ..pipeline import CandidatePipeline
from ..service.app import create_app
from ..service.state import ServiceCore, load_bundle
from .workers import DO_NOT_CHANGE, GENERIC_BASELINE, SimWorker, build_crowd, choose, second_best
from .worldgen import SimDocument, World, WorldSpec, generate_world

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CampaignConfig:
    iterations: int = 9
    hits_per_iteration: int = 12
    first_iteration_hits: int | None = 6  # warm-up batch, half-sized like the live run
    workers_per_hit: int = 10
    crowd_profile: str = "shared"
    crowd_temperature: float | None = 1.2
    crowd_dnc_bias: float = -2.5
    crowd_jitter: float = 0.5
    custom_edit_rate: float = 0.03
    undo_rate: float = 0.03
    train: TrainParams = TrainParams(num_trees=200)
    submit_threshold: int = 3
    include_baseline: bool = True
    baseline_workers: int = 10
    world: WorldSpec | None = None
    personalization_top_k: int = 10  # `run` CLI emits personal.csv for these
    personal_train: TrainParams = TrainParams(num_trees=100)

    def hits_in_iteration(self, t: int) -> int:
        if t == 1 and self.first_iteration_hits is not None:
            return self.first_iteration_hits
        return self.hits_per_iteration

    def total_hits(self) -> int:
        return sum(self.hits_in_iteration(t) for t in range(1, self.iterations + 1))

    def world_spec(self, seed: int) -> WorldSpec:
        if self.world is not None:
            return self.world
        return WorldSpec(seed=seed, n_documents=self.total_hits())

    def to_dict(self) -> dict:
        data = {
            "iterations": self.iterations,
            "hits_per_iteration": self.hits_per_iteration,
            "first_iteration_hits": self.first_iteration_hits,
            "workers_per_hit": self.workers_per_hit,
            "crowd_profile": self.crowd_profile,
            "crowd_temperature": self.crowd_temperature,
            "crowd_dnc_bias": self.crowd_dnc_bias,
            "crowd_jitter": self.crowd_jitter,
            "custom_edit_rate": self.custom_edit_rate,
            "undo_rate": self.undo_rate,
            "train": self.train.to_dict(),
            "submit_threshold": self.submit_threshold,
            "include_baseline": self.include_baseline,
            "baseline_workers": self.baseline_workers,
            "personalization_top_k": self.personalization_top_k,
            "personal_train": self.personal_train.to_dict(),
        }
        if self.world is not None:
            data["world"] = self.world.__dict__
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        kwargs = dict(data)
        if "train" in kwargs:
            kwargs["train"] = TrainParams.from_dict(kwargs["train"])
        if "personal_train" in kwargs:
            kwargs["personal_train"] = TrainParams.from_dict(kwargs["personal_train"])
        if kwargs.get("world"):
            kwargs["world"] = WorldSpec(**kwargs["world"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "CampaignConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class CampaignResult:
    out_dir: Path
    records: list[IterationRecord]
    curve_csv: Path
    config: CampaignConfig
    app_config: AppConfig
    served: list = field(default_factory=list)  # (cp_surface, [surfaces]) per request

    def curve(self) -> dict[int, dict[str, float | None]]:
        return {
            r.iteration: {
                "adaptive": r.mean_ndcg_at_10,
                "baseline": r.mean_ndcg_at_10_baseline,
                "lm_order": r.mean_ndcg_at_10_lm_order,
            }
            for r in self.records
        }


def _write_baseline_letor(
    world: World, app_config: AppConfig, n_workers: int, seed: int, path: Path
) -> None:
    """Generic out-of-domain dataset built from held-out documents.

    A pseudo-crowd with its own (mismatched) preference grades candidates of
    the baseline documents; raw feature rows go out in ranking-dataset form.
    """
    bundle = load_bundle(app_config)
    lm = load_corpus(app_config.lm.corpus, app_config.lm.weights)
    pipeline = CandidatePipeline(bundle, lm, cap=app_config.service.candidate_cap)
    store = HitStore()
    groups: list[RankingGroup] = []
    crowd = [
        SimWorker(worker_id=f"g{i:02d}", weights=GENERIC_BASELINE, temperature=0.7, do_not_change_bias=-1.0)
        for i in range(n_workers)
    ]
    from ..hits import Hit, Sentence

    for d, doc in enumerate(world.baseline_documents):
        hit = Hit(
            hit_id=f"base{d:03d}",
            iteration=1,
            sentences=tuple(Sentence(id=sid, text=text) for sid, text in doc.sentences),
            gold_spans=doc.cp_spans,
        )
        store.add(hit)
        for s, span in enumerate(doc.cp_spans):
            entries = pipeline.served_entries(hit, span)
            if len(entries) < 2:
                continue
            features = np.vstack([e.features for e in entries])
            counts = np.zeros(len(entries), dtype=np.int64)
            for w, worker in enumerate(crowd):
                rng = np.random.default_rng([seed, 7001, d, s, w])
                picked = choose(worker, features, rng)
                if picked != DO_NOT_CHANGE:
                    counts[picked] += 1
            groups.append(
                RankingGroup(
                    query_id=f"{hit.hit_id}.{s}",
                    features=features,
                    relevances=counts,
                    item_ids=[e.surface for e in entries],
                )
            )
    write_letor(groups, path)


def _complete_hit(
    client: TestClient,
    worker: SimWorker,
    worker_index: int,
    hit_id: str,
    hit_seq: int,
    iteration: int,
    seed: int,
    submit_threshold: int,
    served_sink: list | None = None,
) -> None:
    hit = client.get(f"/api/hits/{hit_id}", params={"worker": worker.worker_id}).json()
    replacements = 0
    for span_idx, span in enumerate(hit["gold_spans"]):
        rng = np.random.default_rng([seed, worker_index, hit_seq, span_idx])
        response = client.get(
            f"/api/hits/{hit_id}/candidates",
            params={
                "sentence": span["sentence_id"],
                "start": span["start"],
                "end": span["end"],
                "worker": worker.worker_id,
            },
        )
        listing = response.json()
        candidates = listing["candidates"]
        if served_sink is not None:
            served_sink.append((listing["cp_surface"], [c["surface"] for c in candidates]))
        if not candidates:
            continue
        features = np.array([c["features"] for c in candidates])
        surfaces = [c["surface"] for c in candidates]
        base_event = {
            "worker_id": worker.worker_id,
            "hit_id": hit_id,
            "iteration": iteration,
            "span": span,
            "snapshot_id": listing["snapshot_id"],
            "candidate_list_snapshot": surfaces,
        }
        picked = choose(worker, features, rng)
        if picked == DO_NOT_CHANGE:
            client.post("/api/events", json={**base_event, "kind": "do_not_change"}).raise_for_status()
            continue
        roll = rng.random()
        if roll < worker.custom_edit_rate:
            # express the choice as a typed replacement; case differs on purpose
            client.post(
                "/api/events",
                json={
                    **base_event,
                    "kind": "custom_edit",
                    "chosen_surface": surfaces[picked].upper(),
                },
            ).raise_for_status()
        elif roll < worker.custom_edit_rate + worker.undo_rate and len(surfaces) > 1:
            runner_up = second_best(worker, features, exclude=picked)
            first = {**base_event, "kind": "select", "chosen_surface": surfaces[runner_up]}
            client.post("/api/events", json=first).raise_for_status()
            client.post(
                "/api/events",
                json={
                    "worker_id": worker.worker_id,
                    "hit_id": hit_id,
                    "iteration": iteration,
                    "span": span,
                    "kind": "undo",
                },
            ).raise_for_status()
            client.post(
                "/api/events",
                json={**base_event, "kind": "select", "chosen_surface": surfaces[picked]},
            ).raise_for_status()
        else:
            client.post(
                "/api/events",
                json={**base_event, "kind": "select", "chosen_surface": surfaces[picked]},
            ).raise_for_status()
        replacements += 1
    if replacements >= submit_threshold:
        client.post(
            "/api/events",
            json={
                "worker_id": worker.worker_id,
                "hit_id": hit_id,
                "iteration": iteration,
                "kind": "submit",
                "comment": "",
            },
        ).raise_for_status()


def run_campaign(config: CampaignConfig, seed: int, out_dir: str | Path) -> CampaignResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    world = generate_world(config.world_spec(seed), out / "world")

    needed = config.total_hits()
    if len(world.documents) < needed:
        raise ValueError(
            f"insufficient corpus for disjoint HITs: have {len(world.documents)} "
            f"documents, need {needed}"
        )

    baseline_path = None
    app_config = AppConfig(
        resources=ResourcePaths(
            lexical_thesaurus=world.paths["lexical_thesaurus"],
            distributional_thesaurus=world.paths["distributional_thesaurus"],
            ppdb=world.paths["ppdb"],
            embeddings=world.paths["embeddings"],
            freq_simple_corpus=world.paths["freq_simple_corpus"],
            freq_web_corpus=world.paths["freq_web_corpus"],
        ),
        lm=LmSettings(corpus=world.paths["lm_corpus"]),
        data_dir=str(out / "data"),
        train=config.train,
        service=ServiceSettings(
            submit_threshold=config.submit_threshold,
            workers_per_hit=config.workers_per_hit,
        ),
    )
    if config.include_baseline:
        baseline_path = out / "world" / "baseline.letor"
        _write_baseline_letor(world, app_config, config.baseline_workers, seed, baseline_path)
        app_config = AppConfig(
            resources=app_config.resources,
            lm=app_config.lm,
            data_dir=app_config.data_dir,
            train=app_config.train,
            service=app_config.service,
            baseline_letor=str(baseline_path),
        )
    app_config.write(out / "config.json")
    with open(out / "campaign.json", "w", encoding="utf-8") as fh:
        json.dump({"seed": seed, **config.to_dict()}, fh, indent=2)
        fh.write("\n")

    core = ServiceCore(app_config)
    app = create_app(app_config, core=core)
    client = TestClient(app)
    crowd = build_crowd(
        config.crowd_profile,
        config.workers_per_hit,
        seed,
        temperature=config.crowd_temperature,
        dnc_bias=config.crowd_dnc_bias,
        jitter=config.crowd_jitter,
        custom_edit_rate=config.custom_edit_rate,
        undo_rate=config.undo_rate,
    )

    served_lists: list = []
    records: list[IterationRecord] = []
    doc_cursor = 0
    hit_seq = 0
    for t in range(1, config.iterations + 1):
        hit_ids = []
        for _ in range(config.hits_in_iteration(t)):
            doc: SimDocument = world.documents[doc_cursor]
            doc_cursor += 1
            response = client.post(
                "/api/hits",
                json={
                    "iteration": t,
                    "sentences": [{"id": sid, "text": text} for sid, text in doc.sentences],
                    "cp_spans": [s.to_dict() for s in doc.cp_spans],
                    "assigned_workers": config.workers_per_hit,
                },
            )
            response.raise_for_status()
            hit_ids.append(response.json()["hit_id"])
        for hit_id in hit_ids:
            seq = hit_seq
            hit_seq += 1
            for w, worker in enumerate(crowd):
                _complete_hit(
                    client,
                    worker,
                    w,
                    hit_id,
                    seq,
                    t,
                    seed,
                    config.submit_threshold,
                    served_sink=served_lists,
                )
        response = client.post(f"/api/iterations/{t}/close")
        response.raise_for_status()
        records.append(IterationRecord.from_dict(response.json()))
        logger.info("iteration %d closed: %s", t, records[-1])

    curve_csv = out / "curve.csv"
    curve_csv.write_text(client.get("/api/metrics", params={"format": "csv"}).text, encoding="utf-8")

    return CampaignResult(
        out_dir=out,
        records=records,
        curve_csv=curve_csv,
        config=config,
        app_config=app_config,
        served=served_lists,
    )
