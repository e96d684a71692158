import numpy as np
import pytest

from conftest import get_candidates, make_app_config, post_hit, select_event
from par4sim.adaptive.events import EventKind, EventLog
from par4sim.adaptive.groups import GroupItem, TrainingGroup, build_training_groups
from par4sim.adaptive.loop import (
    build_personal_model,
    evaluate,
    lm_order_ndcg,
    train_baseline,
)
from par4sim.hits import SpanRef
from par4sim.ltr.groups import RankingGroup
from par4sim.ltr.letor import write_letor
from par4sim.ltr.model import TrainParams, empty_model, train_lambdamart
from par4sim.pipeline import ServedCandidate, SpanContext
from par4sim.service.state import ServiceCore


def _group(relevances, features=None, lm_logprobs=None, query_id="g1"):
    n = len(relevances)
    if features is None:
        features = np.random.default_rng(1).uniform(size=(n, 14))
    if lm_logprobs is None:
        lm_logprobs = [-float(i) for i in range(n)]
    items = tuple(
        GroupItem(
            surface=f"c{i}",
            relevance=int(r),
            features=np.asarray(features[i], dtype=np.float64),
            lm_logprob=lm_logprobs[i],
        )
        for i, r in enumerate(relevances)
    )
    return TrainingGroup(
        query_id=query_id,
        hit_id="h0",
        iteration=1,
        cp_surface="cp",
        span=SpanRef("s1", 0, 2),
        items=items,
        first_event_id=1,
    )


class TestEvaluate:
    def test_perfect_model_scores_one(self):
        # single informative feature; relevance equals that feature
        features = np.zeros((4, 14))
        features[:, 0] = [0.9, 0.5, 0.3, 0.1]
        group = _group([3, 2, 1, 0], features=features)
        model = train_lambdamart([group.as_ranking_group()], TrainParams(num_trees=50))
        assert evaluate(model, [group]) == pytest.approx(1.0)

    def test_empty_ensemble_equals_snapshot_order_ndcg(self):
        from par4sim.ltr.metrics import ndcg_at_k

        group = _group([0, 2, 1])
        model = empty_model(n_features=14)
        assert evaluate(model, [group]) == pytest.approx(ndcg_at_k([0, 2, 1], 10))

    def test_all_zero_groups_excluded(self):
        model = empty_model(n_features=14)
        assert evaluate(model, [_group([0, 0, 0])]) is None
        mixed = [_group([0, 0, 0], query_id="z"), _group([1, 0], query_id="g")]
        assert evaluate(model, mixed) == pytest.approx(1.0)  # only the graded group counts

    def test_matches_metric_oracle_on_random_groups(self):
        import math

        def oracle(rels, k=10):
            def dcg(seq):
                return sum((2**r - 1) / math.log2(p + 2) for p, r in enumerate(seq[:k]))

            ideal = dcg(sorted(rels, reverse=True))
            return 0.0 if ideal == 0 else dcg(rels) / ideal

        rng = np.random.default_rng(3)
        model = empty_model(n_features=14)
        for _ in range(50):
            rels = [int(r) for r in rng.integers(0, 5, size=int(rng.integers(2, 8)))]
            group = _group(rels, query_id="r")
            got = evaluate(model, [group])
            expected = oracle(rels)
            if all(r == 0 for r in rels):
                assert got is None
            else:
                assert got == pytest.approx(expected, abs=1e-9)


class TestLmOrder:
    def test_orders_by_logprob(self):
        # lm scores favor item 2; relevances also favor item 2
        group = _group([0, 0, 3], lm_logprobs=[-3.0, -2.0, -1.0])
        assert lm_order_ndcg([group]) == pytest.approx(1.0)

    def test_ignores_model_entirely(self):
        group = _group([3, 0, 0], lm_logprobs=[-1.0, -2.0, -3.0])
        assert lm_order_ndcg([group]) == pytest.approx(1.0)


class TestBaseline:
    def test_trained_from_letor_with_empty_lineage(self, tmp_path):
        rng = np.random.default_rng(5)
        groups = []
        for g in range(10):
            features = rng.uniform(size=(6, 14))
            rels = np.rint(3 * features[:, 0]).astype(int)
            groups.append(RankingGroup(query_id=f"q{g}", features=features, relevances=rels))
        path = tmp_path / "generic.letor"
        write_letor(groups, path)
        model = train_baseline(path, TrainParams(num_trees=20))
        assert model.trained_on == set()
        assert model.model_id == "baseline"
        assert len(model.trees) == 20


SNAPSHOT = ("alpha", "beta", "gamma")


def _binary_context(_hit_id, _span):
    rng = np.random.default_rng(hash(_hit_id) % (2**32))
    return SpanContext(
        cp_surface="cp",
        entries={
            s: ServedCandidate(
                surface=s, sources=("lexical",), lm_logprob=-1.0, features=rng.uniform(size=14)
            )
            for s in SNAPSHOT
        },
    )


class TestPersonalModel:
    def _log_with_worker_iterations(self, iterations):
        log = EventLog()
        for t in iterations:
            for h in range(3):
                log.append(
                    worker_id="w1",
                    hit_id=f"h{t}-{h}",
                    iteration=t,
                    kind=EventKind.SELECT,
                    span=SpanRef("s1", 0, 2),
                    chosen_surface=SNAPSHOT[h % 3],
                    candidate_list_snapshot=SNAPSHOT,
                )
        return log

    def test_single_iteration_worker_rejected(self):
        log = self._log_with_worker_iterations([1])
        with pytest.raises(ValueError, match="fewer than 2"):
            build_personal_model(log.events(), "w1", _binary_context, TrainParams(num_trees=5))

    def test_trajectory_rows_per_later_iteration(self):
        log = self._log_with_worker_iterations([1, 2, 3])
        model, rows = build_personal_model(
            log.events(), "w1", _binary_context, TrainParams(num_trees=5)
        )
        assert model is not None
        assert [r.iteration for r in rows] == [2, 3]
        assert model.worker_scope == "w1"
        for row in rows:
            assert 0 < row.positive_pct <= 100
            assert row.instances > 0

    def test_positive_pct_near_one_in_n(self):
        log = self._log_with_worker_iterations([1, 2])
        _model, rows = build_personal_model(
            log.events(), "w1", _binary_context, TrainParams(num_trees=5)
        )
        # one selection among 3 shown candidates per group
        assert rows[0].positive_pct == pytest.approx(100 / 3, abs=1e-6)


class TestBinaryGroups:
    def test_binary_relevance_marks_only_the_selection(self):
        log = EventLog()
        span = SpanRef("s1", 0, 2)
        log.append(
            worker_id="w1", hit_id="h1", iteration=1, kind=EventKind.SELECT,
            span=span, chosen_surface="beta", candidate_list_snapshot=SNAPSHOT,
        )
        log.append(
            worker_id="w2", hit_id="h1", iteration=1, kind=EventKind.SELECT,
            span=span, chosen_surface="alpha", candidate_list_snapshot=SNAPSHOT,
        )
        (group,) = build_training_groups(
            log.events(), {1}, _binary_context, binary_for_worker="w1"
        )
        assert list(group.relevances) == [0, 1, 0]


class TestServiceRestart:
    def test_state_restored_from_disk(self, tmp_path, small_world):
        from fastapi.testclient import TestClient

        from par4sim.service.app import create_app

        config = make_app_config(tmp_path, small_world)
        core = ServiceCore(config)
        client = TestClient(create_app(config, core=core))
        doc = small_world.documents[0]
        hit_id = post_hit(client, doc)
        for w in range(3):
            for span in doc.cp_spans:
                listing = get_candidates(client, hit_id, span, worker=f"w{w}")
                surface = listing["candidates"][w % len(listing["candidates"])]["surface"]
                select_event(client, hit_id, span, listing, surface, worker=f"w{w}")
        assert client.post("/api/iterations/1/close").status_code == 200

        # a fresh core over the same data_dir picks up where we left off
        revived = ServiceCore(config)
        assert revived.loop.current_iteration == 2
        assert revived.loop.closed == {1}
        assert revived.loop.active_model is not None
        assert revived.loop.active_model.model_id == "global-i01"
        assert len(revived.loop.records) == 1
        assert hit_id in revived.hit_store
        assert len(revived.event_log.events()) == len(core.event_log.events())


class TestPersonalizationInService:
    def test_personal_model_served_when_enabled(self, tmp_path, small_world):
        from fastapi.testclient import TestClient

        from par4sim.service.app import create_app

        config = make_app_config(
            tmp_path, small_world, personalization=True, personal_min_iterations=1
        )
        core = ServiceCore(config)
        client = TestClient(create_app(config, core=core))
        doc = small_world.documents[0]
        hit_id = post_hit(client, doc)
        for w in range(3):
            for span in doc.cp_spans:
                listing = get_candidates(client, hit_id, span, worker=f"w{w}")
                surface = listing["candidates"][w % len(listing["candidates"])]["surface"]
                select_event(client, hit_id, span, listing, surface, worker=f"w{w}")
        client.post("/api/iterations/1/close")

        doc2 = small_world.documents[1]
        hit2 = post_hit(client, doc2, iteration=2)
        personal = get_candidates(client, hit2, doc2.cp_spans[0], worker="w0")
        assert personal["model_id"].startswith("personal-w0")
        fresh = get_candidates(client, hit2, doc2.cp_spans[0], worker="stranger")
        assert fresh["model_id"] == "global-i01"
