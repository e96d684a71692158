import math

import numpy as np
import pytest

from par4sim.features import NUM_FEATURES
from par4sim.ltr.model import TrainParams
from par4sim.simulator.campaign import CampaignConfig, run_campaign
from par4sim.simulator.stats import slope_is_flat, slope_t_statistic, t_critical_95
from par4sim.simulator.workers import (
    DO_NOT_CHANGE,
    SimWorker,
    build_crowd,
    choose,
    second_best,
)
from par4sim.simulator.worldgen import WorldSpec, generate_world

TINY_CAMPAIGN = CampaignConfig(
    iterations=2,
    hits_per_iteration=2,
    first_iteration_hits=None,
    workers_per_hit=4,
    train=TrainParams(num_trees=8),
    include_baseline=True,
    world=WorldSpec(
        seed=0,
        n_documents=4,
        sentences_per_document=4,
        cps_per_document=3,
        n_cp_types=10,
        candidate_vocab=30,
        filler_vocab=15,
        embedding_dim=8,
        lm_corpus_lines=120,
        extra_documents=2,
    ),
)


def _worker(weights=None, **kw):
    if weights is None:
        weights = [0.0] * NUM_FEATURES
        weights[3] = 1.0  # favors feature 4
    return SimWorker(worker_id="w0", weights=tuple(weights), **kw)


class TestChoose:
    def test_temperature_zero_is_argmax(self):
        worker = _worker(temperature=0)
        rows = np.zeros((4, NUM_FEATURES))
        rows[:, 3] = [1.0, 5.0, 3.0, 5.0]
        rng = np.random.default_rng(0)
        assert choose(worker, rows, rng) == 1  # ties: lowest index

    def test_infinite_dnc_bias_always_declines(self):
        worker = _worker(temperature=0, do_not_change_bias=math.inf)
        rows = np.ones((3, NUM_FEATURES))
        assert choose(worker, rows, np.random.default_rng(0)) == DO_NOT_CHANGE

    def test_fixed_seed_reproducible(self):
        worker = _worker(temperature=1.0)
        rows = np.random.default_rng(5).uniform(size=(6, NUM_FEATURES))
        picks_a = [choose(worker, rows, np.random.default_rng([9, i])) for i in range(20)]
        picks_b = [choose(worker, rows, np.random.default_rng([9, i])) for i in range(20)]
        assert picks_a == picks_b

    def test_uniform_worker_spreads_choices(self):
        worker = _worker(temperature=None)
        rows = np.zeros((3, NUM_FEATURES))
        picks = {choose(worker, rows, np.random.default_rng([3, i])) for i in range(60)}
        assert picks == {0, 1, 2, DO_NOT_CHANGE}

    def test_empty_list_declines(self):
        worker = _worker()
        assert choose(worker, np.zeros((0, NUM_FEATURES)), np.random.default_rng(0)) == DO_NOT_CHANGE

    def test_second_best_is_runner_up(self):
        worker = _worker(temperature=0)
        rows = np.zeros((3, NUM_FEATURES))
        rows[:, 3] = [1.0, 5.0, 3.0]
        assert second_best(worker, rows, exclude=1) == 2


class TestCrowds:
    def test_profiles(self):
        shared = build_crowd("shared", 10, seed=1)
        assert len(shared) == 10
        assert len({w.worker_id for w in shared}) == 10
        hetero = build_crowd("heterogeneous", 10, seed=1, temperature=0.3)
        weight_sets = {w.weights for w in hetero}
        assert len(weight_sets) == 10
        uniform = build_crowd("uniform", 3, seed=1)
        assert all(w.temperature is None for w in uniform)

    def test_unknown_profile(self):
        with pytest.raises(ValueError, match="unknown crowd profile"):
            build_crowd("nope", 2, seed=1)


class TestStats:
    def test_steep_slope_not_flat(self):
        xs = list(range(2, 10))
        ys = [0.1 * x for x in xs]
        slope, t = slope_t_statistic(xs, [y + 0.001 * ((-1) ** i) for i, y in enumerate(ys)])
        assert slope == pytest.approx(0.1, abs=0.01)
        assert abs(t) > t_critical_95(len(xs) - 2)
        assert not slope_is_flat(xs, ys)

    def test_noise_is_flat(self):
        rng = np.random.default_rng(11)
        xs = list(range(2, 10))
        ys = list(0.5 + 0.05 * rng.standard_normal(len(xs)))
        assert slope_is_flat(xs, ys)


class TestWorldgen:
    def test_deterministic(self, tmp_path):
        spec = TINY_CAMPAIGN.world
        w1 = generate_world(spec, tmp_path / "a")
        w2 = generate_world(spec, tmp_path / "b")
        assert [d.sentences for d in w1.documents] == [d.sentences for d in w2.documents]
        assert (tmp_path / "a" / "ppdb.tsv").read_bytes() == (tmp_path / "b" / "ppdb.tsv").read_bytes()

    def test_spans_match_cp_words(self, tmp_path):
        world = generate_world(TINY_CAMPAIGN.world, tmp_path / "w")
        for doc in world.documents:
            texts = dict(doc.sentences)
            for span in doc.cp_spans:
                surface = texts[span.sentence_id][span.start : span.end]
                assert surface.isalnum()


class TestCampaign:
    def test_tiny_campaign_end_to_end(self, tmp_path):
        result = run_campaign(TINY_CAMPAIGN, seed=5, out_dir=tmp_path / "run")
        assert len(result.records) == 2
        assert result.records[0].mean_ndcg_at_10 is None
        assert result.records[1].mean_ndcg_at_10 is not None
        assert result.records[1].mean_ndcg_at_10_baseline is not None
        text = result.curve_csv.read_text()
        assert text.splitlines()[0] == "iteration,adaptive,baseline,lm_order"
        assert (tmp_path / "run" / "data" / "events.jsonl").exists()
        assert (tmp_path / "run" / "data" / "models" / "global-i02.json").exists()

    def test_campaign_deterministic(self, tmp_path):
        first = run_campaign(TINY_CAMPAIGN, seed=9, out_dir=tmp_path / "one")
        second = run_campaign(TINY_CAMPAIGN, seed=9, out_dir=tmp_path / "two")
        assert first.curve_csv.read_bytes() == second.curve_csv.read_bytes()

    def test_insufficient_corpus_rejected(self, tmp_path):
        config = CampaignConfig(
            iterations=3,
            hits_per_iteration=2,
            first_iteration_hits=None,
            workers_per_hit=2,
            world=TINY_CAMPAIGN.world,  # only 4 documents
        )
        with pytest.raises(ValueError, match="insufficient corpus"):
            run_campaign(config, seed=1, out_dir=tmp_path / "run")

    def test_deterministic_shared_crowd_converges(self, tmp_path):
        """A noise-free consensus over a few features is learned almost
        perfectly within a few batches."""
        config = CampaignConfig(
            iterations=4,
            hits_per_iteration=6,
            first_iteration_hits=None,
            workers_per_hit=6,
            crowd_profile="simple",
            crowd_temperature=0,
            crowd_jitter=0.0,
            custom_edit_rate=0.0,
            undo_rate=0.0,
            train=TrainParams(num_trees=100),
            include_baseline=False,
        )
        result = run_campaign(config, seed=11, out_dir=tmp_path / "run")
        assert result.records[3].mean_ndcg_at_10 >= 0.95

    def test_hits_disjoint_across_iterations(self, tmp_path):
        result = run_campaign(TINY_CAMPAIGN, seed=5, out_dir=tmp_path / "run")
        from par4sim.hits import HitStore

        store = HitStore(tmp_path / "run" / "data" / "hits.jsonl")
        hits_1 = store.hits_in_iteration(1)
        hits_2 = store.hits_in_iteration(2)
        assert hits_1 and hits_2
        assert not (hits_1 & hits_2)
        texts = set()
        for hid in hits_1 | hits_2:
            doc_text = store.get(hid).document_text()
            assert doc_text not in texts
            texts.add(doc_text)
