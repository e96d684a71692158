"""NDCG, swap deltas, and lambda gradients against from-the-formula oracles."""

import math

import numpy as np
import pytest

from par4sim.ltr.lambdas import compute_lambdas
from par4sim.ltr.metrics import delta_ndcg, ndcg_at_k, rank_positions


def oracle_ndcg(ranked_rels, k):
    """Independent re-implementation: plain loops, no shared code."""

    def dcg(rels):
        return sum((2 ** r - 1) / math.log2(p + 2) for p, r in enumerate(rels[:k]))

    ideal = dcg(sorted(ranked_rels, reverse=True))
    if ideal == 0:
        return 0.0
    return dcg(list(ranked_rels)) / ideal


def rank_by_scores(scores):
    """Descending score, ties by ascending index; returns item order."""
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


class TestNdcg:
    def test_ideal_order_is_one(self):
        assert ndcg_at_k([3, 2, 0], 10) == pytest.approx(1.0)

    def test_worked_example(self):
        expected = (3 + 7 / math.log2(3)) / (7 + 3 / math.log2(3))
        assert ndcg_at_k([2, 3, 0], 10) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.8340, abs=1e-4)

    def test_all_zero_relevances(self):
        assert ndcg_at_k([0, 0, 0], 10) == 0.0

    def test_matches_oracle_on_random_groups(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            n = rng.integers(1, 9)
            rels = rng.integers(0, 11, size=n)
            for k in (1, 3, 10):
                assert ndcg_at_k(rels, k) == pytest.approx(oracle_ndcg(list(rels), k), abs=1e-9)

    def test_truncation(self):
        assert ndcg_at_k([0, 0, 3], 2) == 0.0
        assert ndcg_at_k([3, 0, 0], 1) == 1.0


class TestRankPositions:
    def test_ties_break_by_index(self):
        assert list(rank_positions([1.0, 1.0, 2.0])) == [2, 3, 1]

    def test_distinct_scores(self):
        assert list(rank_positions([0.1, 0.9, 0.5])) == [3, 1, 2]


class TestDeltaNdcg:
    def test_worked_example(self):
        expected = abs(1 * (1 - 1 / math.log2(3)))
        assert delta_ndcg([1, 0], [0.0, 0.0], 0, 1, 10) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.3691, abs=1e-4)

    def test_equal_relevance_gives_zero(self):
        assert delta_ndcg([2, 2], [0.5, 0.1], 0, 1, 10) == 0.0

    def test_both_beyond_k_gives_zero(self):
        rels = [3, 2, 1, 1]
        scores = [4.0, 3.0, 2.0, 1.0]
        assert delta_ndcg(rels, scores, 2, 3, 2) == 0.0

    def test_matches_explicit_swap_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(400):
            n = int(rng.integers(2, 9))
            rels = rng.integers(0, 5, size=n)
            scores = rng.normal(size=n)
            i, j = rng.choice(n, size=2, replace=False)
            k = int(rng.choice([1, 3, 10]))

            order = rank_by_scores(scores)
            before = oracle_ndcg([rels[x] for x in order], k)
            pos_i, pos_j = order.index(int(i)), order.index(int(j))
            swapped = list(order)
            swapped[pos_i], swapped[pos_j] = swapped[pos_j], swapped[pos_i]
            after = oracle_ndcg([rels[x] for x in swapped], k)

            assert delta_ndcg(rels, scores, int(i), int(j), k) == pytest.approx(
                abs(before - after), abs=1e-9
            )


class TestLambdas:
    def test_two_item_hand_values(self):
        lambdas, hessians = compute_lambdas([1, 0], [0.0, 0.0], sigma=1.0, k=10)
        delta = abs(1 - 1 / math.log2(3))
        assert lambdas[0] == pytest.approx(0.5 * delta, abs=1e-12)
        assert lambdas[1] == pytest.approx(-0.5 * delta, abs=1e-12)
        assert lambdas[0] == pytest.approx(0.1846, abs=1e-4)
        assert hessians[0] == pytest.approx(0.25 * delta, abs=1e-12)
        assert hessians[1] == pytest.approx(hessians[0])
        assert hessians[0] == pytest.approx(0.0923, abs=1e-4)

    def test_uniform_relevance_all_zero(self):
        lambdas, hessians = compute_lambdas([2, 2, 2], [0.3, 0.2, 0.1], sigma=1.0, k=10)
        assert np.all(lambdas == 0)
        assert np.all(hessians == 0)

    def test_lambdas_sum_to_zero_and_hessians_nonnegative(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            n = int(rng.integers(2, 10))
            rels = rng.integers(0, 6, size=n)
            scores = rng.normal(size=n)
            lambdas, hessians = compute_lambdas(rels, scores, sigma=1.0, k=10)
            assert abs(lambdas.sum()) < 1e-12
            assert np.all(hessians >= 0)

    def test_pairwise_magnitude_matches_finite_differences(self):
        # d/ds_i of delta * log(1 + exp(-sigma*(s_i - s_j))) = -sigma*rho*delta
        rng = np.random.default_rng(99)
        sigma = 1.0
        h = 1e-5
        for _ in range(200):
            rels = [int(rng.integers(1, 6)), 0]
            scores = rng.normal(size=2)
            delta = delta_ndcg(rels, scores, 0, 1, 10)

            def surrogate(s_i):
                return delta * math.log1p(math.exp(-sigma * (s_i - scores[1])))

            numeric = (surrogate(scores[0] + h) - surrogate(scores[0] - h)) / (2 * h)
            lambdas, _ = compute_lambdas(rels, scores, sigma=sigma, k=10)
            assert lambdas[0] == pytest.approx(-numeric, abs=1e-6)
