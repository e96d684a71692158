import pytest
from fastapi.testclient import TestClient

from par4sim.config import AppConfig, LmSettings, ResourcePaths, ServiceSettings
from par4sim.ltr.model import TrainParams
from par4sim.service.app import create_app
from par4sim.service.state import ServiceCore
from par4sim.simulator.worldgen import WorldSpec, generate_world

TINY_WORLD = WorldSpec(
    seed=7,
    n_documents=6,
    sentences_per_document=4,
    cps_per_document=3,
    n_cp_types=12,
    candidate_vocab=40,
    filler_vocab=20,
    embedding_dim=8,
    lm_corpus_lines=150,
    extra_documents=3,
)


def make_app_config(tmp_path, world, **service_kwargs) -> AppConfig:
    return AppConfig(
        resources=ResourcePaths(
            lexical_thesaurus=world.paths["lexical_thesaurus"],
            distributional_thesaurus=world.paths["distributional_thesaurus"],
            ppdb=world.paths["ppdb"],
            embeddings=world.paths["embeddings"],
            freq_simple_corpus=world.paths["freq_simple_corpus"],
            freq_web_corpus=world.paths["freq_web_corpus"],
        ),
        lm=LmSettings(corpus=world.paths["lm_corpus"]),
        data_dir=str(tmp_path / "data"),
        train=TrainParams(num_trees=10),
        service=ServiceSettings(**service_kwargs),
    )


@pytest.fixture
def small_world(tmp_path):
    return generate_world(TINY_WORLD, tmp_path / "world")


@pytest.fixture
def service(tmp_path, small_world):
    """(client, core, world) against a tiny synthetic world."""
    config = make_app_config(tmp_path, small_world)
    core = ServiceCore(config)
    app = create_app(config, core=core)
    with TestClient(app) as client:
        yield client, core, small_world


def post_hit(client, doc, iteration=1, assigned_workers=10):
    response = client.post(
        "/api/hits",
        json={
            "iteration": iteration,
            "sentences": [{"id": sid, "text": text} for sid, text in doc.sentences],
            "cp_spans": [s.to_dict() for s in doc.cp_spans],
            "assigned_workers": assigned_workers,
        },
    )
    assert response.status_code == 201, response.text
    return response.json()["hit_id"]


def get_candidates(client, hit_id, span, worker="w1"):
    response = client.get(
        f"/api/hits/{hit_id}/candidates",
        params={
            "sentence": span.sentence_id,
            "start": span.start,
            "end": span.end,
            "worker": worker,
        },
    )
    assert response.status_code == 200, response.text
    return response.json()


def select_event(client, hit_id, span, listing, surface, worker="w1", iteration=1, kind="select"):
    payload = {
        "worker_id": worker,
        "hit_id": hit_id,
        "iteration": iteration,
        "kind": kind,
        "span": span.to_dict(),
        "snapshot_id": listing["snapshot_id"],
        "candidate_list_snapshot": [c["surface"] for c in listing["candidates"]],
    }
    if kind == "select":
        payload["chosen_surface"] = surface
    return client.post("/api/events", json=payload)
