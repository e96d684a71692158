from conftest import get_candidates, post_hit, select_event


class TestHits:
    def test_create_and_fetch(self, service):
        client, _core, world = service
        hit_id = post_hit(client, world.documents[0])
        view = client.get(f"/api/hits/{hit_id}").json()
        assert view["iteration"] == 1
        assert len(view["sentences"]) == 4
        assert len(view["gold_spans"]) == 3
        assert view["submit_threshold"] == 3

    def test_unknown_hit_404(self, service):
        client, _core, _world = service
        assert client.get("/api/hits/nope").status_code == 404

    def test_span_beyond_sentence_rejected(self, service):
        client, _core, world = service
        doc = world.documents[0]
        response = client.post(
            "/api/hits",
            json={
                "iteration": 1,
                "sentences": [{"id": sid, "text": text} for sid, text in doc.sentences],
                "cp_spans": [{"sentence_id": doc.sentences[0][0], "start": 0, "end": 10_000}],
            },
        )
        assert response.status_code == 400

    def test_sentence_count_bounds_configurable(self, tmp_path, small_world):
        from conftest import make_app_config
        from fastapi.testclient import TestClient

        from par4sim.service.app import create_app
        from par4sim.service.state import ServiceCore

        config = make_app_config(tmp_path, small_world, min_hit_sentences=5, max_hit_sentences=10)
        client = TestClient(create_app(config, core=ServiceCore(config)))
        doc = small_world.documents[0]  # 4 sentences: below the floor
        response = client.post(
            "/api/hits",
            json={
                "iteration": 1,
                "sentences": [{"id": sid, "text": text} for sid, text in doc.sentences],
                "cp_spans": [],
            },
        )
        assert response.status_code == 400
        assert "5..10" in response.json()["detail"]

    def test_closed_iteration_rejects_hit(self, service):
        client, core, world = service
        post_hit(client, world.documents[0])
        response = client.post(
            "/api/hits",
            json={
                "iteration": 2,
                "sentences": [{"id": "x", "text": "plain text"}],
                "cp_spans": [],
            },
        )
        assert response.status_code == 409


class TestCandidates:
    def test_iteration_one_serves_lm_order(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        assert listing["model_id"] is None
        candidates = listing["candidates"]
        assert 0 < len(candidates) <= 10
        logprobs = [c["lm_logprob"] for c in candidates]
        assert logprobs == sorted(logprobs, reverse=True)
        assert all(c["model_score"] is None for c in candidates)

    def test_candidate_contract(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        for span in doc.cp_spans:
            listing = get_candidates(client, hit_id, span)
            surfaces = [c["surface"].lower() for c in listing["candidates"]]
            assert len(surfaces) <= 10
            assert len(set(surfaces)) == len(surfaces)
            assert listing["cp_surface"].lower() not in surfaces

    def test_same_request_same_snapshot(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        first = get_candidates(client, hit_id, doc.cp_spans[0])
        second = get_candidates(client, hit_id, doc.cp_spans[0])
        assert first["snapshot_id"] == second["snapshot_id"]
        assert [c["surface"] for c in first["candidates"]] == [
            c["surface"] for c in second["candidates"]
        ]

    def test_unknown_span_404(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        response = client.get(
            f"/api/hits/{hit_id}/candidates",
            params={"sentence": doc.sentences[0][0], "start": 0, "end": 2},
        )
        assert response.status_code == 404

    def test_empty_list_when_resources_yield_nothing(self, service):
        client, _core, _world = service
        response = client.post(
            "/api/hits",
            json={
                "iteration": 1,
                "sentences": [{"id": "x1", "text": "a zzzqqq sentence"}],
                "cp_spans": [{"sentence_id": "x1", "start": 2, "end": 8}],
            },
        )
        hit_id = response.json()["hit_id"]
        listing = client.get(
            f"/api/hits/{hit_id}/candidates",
            params={"sentence": "x1", "start": 2, "end": 8, "worker": "w1"},
        )
        assert listing.status_code == 200
        assert listing.json()["candidates"] == []
        assert listing.json()["snapshot_id"]

    def test_worker_id_header_accepted(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        span = {"sentence_id": doc.sentences[0][0], "start": 0, "end": 3}
        response = client.post(
            "/api/events",
            json={"worker_id": "w7", "hit_id": hit_id, "iteration": 1, "kind": "add_cp", "span": span},
        )
        assert response.status_code == 201
        view = client.get(f"/api/hits/{hit_id}", headers={"X-Worker-Id": "w7"}).json()
        assert span in view["worker_spans"]

    def test_features_are_14_dimensional(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        assert all(len(c["features"]) == 14 for c in listing["candidates"])


class TestEvents:
    def test_select_roundtrip(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        surface = listing["candidates"][0]["surface"]
        response = select_event(client, hit_id, doc.cp_spans[0], listing, surface)
        assert response.status_code == 201
        assert response.json()["event_id"] == 1

    def test_select_outside_snapshot_rejected(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        response = select_event(client, hit_id, doc.cp_spans[0], listing, "not-a-candidate")
        assert response.status_code == 400

    def test_unknown_snapshot_conflict(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        listing["snapshot_id"] = "snap999999"
        response = select_event(
            client, hit_id, doc.cp_spans[0], listing, listing["candidates"][0]["surface"]
        )
        assert response.status_code == 409

    def test_snapshot_list_mismatch_conflict(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        payload = {
            "worker_id": "w1",
            "hit_id": hit_id,
            "iteration": 1,
            "kind": "select",
            "span": doc.cp_spans[0].to_dict(),
            "snapshot_id": listing["snapshot_id"],
            "candidate_list_snapshot": ["tampered"],
            "chosen_surface": "tampered",
        }
        assert client.post("/api/events", json=payload).status_code == 409

    def test_submit_gate(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        submit = {
            "worker_id": "w1",
            "hit_id": hit_id,
            "iteration": 1,
            "kind": "submit",
            "comment": "done",
        }
        response = client.post("/api/events", json=submit)
        assert response.status_code == 409
        assert "submit gate" in response.json()["detail"]
        for span in doc.cp_spans:  # 3 spans = threshold
            listing = get_candidates(client, hit_id, span)
            select_event(client, hit_id, span, listing, listing["candidates"][0]["surface"])
        assert client.post("/api/events", json=submit).status_code == 201

    def test_add_cp_read_your_writes(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        # find a plain word in a sentence without a gold span at that spot
        sid, text = doc.sentences[0]
        word = text.split()[0]  # "the"
        start = text.index(word)
        span = {"sentence_id": sid, "start": start, "end": start + len(word)}
        response = client.post(
            "/api/events",
            json={
                "worker_id": "w9",
                "hit_id": hit_id,
                "iteration": 1,
                "kind": "add_cp",
                "span": span,
            },
        )
        assert response.status_code == 201
        view = client.get(f"/api/hits/{hit_id}", params={"worker": "w9"}).json()
        assert span in view["worker_spans"]
        other = client.get(f"/api/hits/{hit_id}", params={"worker": "other"}).json()
        assert span not in other["worker_spans"]
        # the added span is now servable for this worker
        response = client.get(
            f"/api/hits/{hit_id}/candidates",
            params={"sentence": sid, "start": span["start"], "end": span["end"], "worker": "w9"},
        )
        assert response.status_code == 200

    def test_add_cp_overlap_rejected(self, service):
        client, _core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        gold = doc.cp_spans[0]
        response = client.post(
            "/api/events",
            json={
                "worker_id": "w9",
                "hit_id": hit_id,
                "iteration": 1,
                "kind": "add_cp",
                "span": {"sentence_id": gold.sentence_id, "start": gold.start, "end": gold.end},
            },
        )
        assert response.status_code == 400


class TestIterations:
    def _work_iteration(self, client, world, iteration, docs):
        hit_ids = [post_hit(client, doc, iteration=iteration) for doc in docs]
        for hit_id, doc in zip(hit_ids, docs):
            for w in range(4):
                for span in doc.cp_spans:
                    listing = get_candidates(client, hit_id, span, worker=f"w{w}")
                    surface = listing["candidates"][w % len(listing["candidates"])]["surface"]
                    response = select_event(
                        client, hit_id, span, listing, surface, worker=f"w{w}", iteration=iteration
                    )
                    assert response.status_code == 201, response.text
        return hit_ids

    def test_close_cycle(self, service):
        client, core, world = service
        self._work_iteration(client, world, 1, world.documents[:2])
        record = client.post("/api/iterations/1/close")
        assert record.status_code == 200, record.text
        body = record.json()
        assert body["iteration"] == 1
        assert body["mean_ndcg_at_10"] is None  # nothing to evaluate at t=1
        assert body["mean_ndcg_at_10_lm_order"] is not None
        assert body["model_id"] == "global-i01"

        # iteration 2 is served by the trained model
        doc = world.documents[2]
        hit_id = post_hit(client, doc, iteration=2)
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        assert listing["model_id"] == "global-i01"
        assert all(c["model_score"] is not None for c in listing["candidates"])

        self._work_iteration(client, world, 2, world.documents[3:5])
        body2 = client.post("/api/iterations/2/close").json()
        assert body2["mean_ndcg_at_10"] is not None

    def test_double_close_conflict(self, service):
        client, _core, world = service
        self._work_iteration(client, world, 1, world.documents[:1])
        assert client.post("/api/iterations/1/close").status_code == 200
        assert client.post("/api/iterations/1/close").status_code == 409

    def test_close_without_groups_conflict(self, service):
        client, _core, world = service
        post_hit(client, world.documents[0])
        assert client.post("/api/iterations/1/close").status_code == 409

    def test_event_to_closed_iteration_rejected(self, service):
        client, _core, world = service
        docs = world.documents
        self._work_iteration(client, world, 1, docs[:1])
        hit_id = "h0000"
        doc = docs[0]
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        assert client.post("/api/iterations/1/close").status_code == 200
        response = select_event(
            client, hit_id, doc.cp_spans[0], listing, listing["candidates"][0]["surface"]
        )
        assert response.status_code == 409  # stale snapshot / closed iteration

    def test_events_refused_while_close_in_progress(self, service):
        client, core, world = service
        doc = world.documents[0]
        hit_id = post_hit(client, doc)
        listing = get_candidates(client, hit_id, doc.cp_spans[0])
        core._closing = True
        response = select_event(
            client, hit_id, doc.cp_spans[0], listing, listing["candidates"][0]["surface"]
        )
        core._closing = False
        assert response.status_code == 409
        assert "retry" in response.json()["detail"]

    def test_metrics_json_and_csv(self, service):
        client, _core, world = service
        self._work_iteration(client, world, 1, world.documents[:1])
        client.post("/api/iterations/1/close")
        body = client.get("/api/metrics").json()
        assert body["current_iteration"] == 2
        assert len(body["records"]) == 1
        csv_text = client.get("/api/metrics", params={"format": "csv"}).text
        lines = csv_text.strip().splitlines()
        assert lines[0] == "iteration,adaptive,baseline,lm_order"
        assert lines[1].startswith("1,,")  # t=1 adaptive unevaluated

    def test_separation_metadata(self, service):
        client, core, world = service
        self._work_iteration(client, world, 1, world.documents[:2])
        client.post("/api/iterations/1/close")
        self._work_iteration(client, world, 2, world.documents[2:4])
        client.post("/api/iterations/2/close")
        model = core.loop.active_model
        assert model.trained_on == {1, 2}
        hits_1 = core.hit_store.hits_in_iteration(1)
        hits_2 = core.hit_store.hits_in_iteration(2)
        assert model.trained_on_hits == hits_1 | hits_2
        assert core.loop.separation_checks >= 1
