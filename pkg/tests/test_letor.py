import numpy as np
import pytest

from par4sim.ltr.groups import RankingGroup
from par4sim.ltr.letor import read_letor, write_letor


def _groups():
    rng = np.random.default_rng(2)
    return [
        RankingGroup(
            query_id="q1",
            features=np.round(rng.uniform(-3, 3, size=(4, 14)), 6),
            relevances=np.array([6, 2, 1, 0]),
            item_ids=["a", "b", "c", "d"],
        ),
        RankingGroup(
            query_id="q2",
            features=np.round(rng.uniform(0, 1, size=(2, 14)), 6),
            relevances=np.array([1, 0]),
            item_ids=["e", "f"],
        ),
    ]


class TestRoundTrip:
    def test_read_write_identity_at_six_decimals(self, tmp_path):
        groups = _groups()
        path = tmp_path / "data.letor"
        write_letor(groups, path)
        loaded = read_letor(path)
        assert [g.query_id for g in loaded] == ["q1", "q2"]
        for orig, got in zip(groups, loaded):
            assert np.array_equal(orig.relevances, got.relevances)
            assert orig.item_ids == got.item_ids
            assert np.allclose(orig.features, got.features, atol=5e-7)

    def test_write_read_write_is_stable(self, tmp_path):
        groups = _groups()
        first = tmp_path / "one.letor"
        second = tmp_path / "two.letor"
        write_letor(groups, first)
        write_letor(read_letor(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_graded_relevance_leads_line(self, tmp_path):
        path = tmp_path / "data.letor"
        write_letor(_groups(), path)
        first_line = path.read_text().splitlines()[0]
        assert first_line.startswith("6 qid:q1 1:")
        assert first_line.endswith("# a")


class TestParseErrors:
    def test_missing_qid_reports_line(self, tmp_path):
        path = tmp_path / "bad.letor"
        path.write_text("1 qid:q1 1:0.5\n2 1:0.5\n", encoding="utf-8")
        with pytest.raises(ValueError, match=":2"):
            read_letor(path)

    def test_bad_feature_chunk(self, tmp_path):
        path = tmp_path / "bad.letor"
        path.write_text("1 qid:q1 1:abc\n", encoding="utf-8")
        with pytest.raises(ValueError, match=":1"):
            read_letor(path)

    def test_comment_lines_ignored(self, tmp_path):
        path = tmp_path / "ok.letor"
        path.write_text("# header\n1 qid:q1 1:0.5 # x\n", encoding="utf-8")
        (group,) = read_letor(path)
        assert group.item_ids == ["x"]
