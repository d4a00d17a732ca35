import numpy as np
import pytest

from conftest import brute_matched_accuracy, rand_index_pairs
from softecm.evaluation import matched_accuracy, rand_index


class TestRandIndex:
    def test_identical_labelings(self):
        assert rand_index([0, 1, 2, 0], [0, 1, 2, 0]) == 1.0

    def test_hand_checked_value(self):
        assert rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(1 / 3)

    def test_label_name_invariance(self):
        a = [0, 0, 1, 1, 2]
        b = [5, 5, 9, 9, 7]
        assert rand_index(a, b) == 1.0

    def test_too_short(self):
        with pytest.raises(ValueError):
            rand_index([0], [0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rand_index([0, 1], [0, 1, 1])

    def test_matches_pair_enumeration_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(2, 31))
            a = rng.integers(0, 4, size=n)
            b = rng.integers(0, 4, size=n)
            assert rand_index(a, b) == pytest.approx(rand_index_pairs(a, b))


class TestMatchedAccuracy:
    def test_exact_match(self):
        assert matched_accuracy([0, 1, 1, 0], [0, 1, 1, 0]) == 1.0

    def test_renamed_labels(self):
        assert matched_accuracy([2, 0, 0, 2], [0, 1, 1, 0]) == 1.0

    def test_hand_checked_value(self):
        assert matched_accuracy([0, 0, 1, 1, 1], [1, 1, 0, 0, 1]) == pytest.approx(0.8)

    def test_surplus_clusters(self):
        # three predicted clusters, two classes: the worst cluster is unmatched
        assert matched_accuracy([0, 1, 2, 2], [0, 0, 1, 1]) == pytest.approx(0.75)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            n = int(rng.integers(2, 9))
            pred = rng.integers(0, 4, size=n)
            truth = rng.integers(0, 4, size=n)
            assert matched_accuracy(pred, truth) == pytest.approx(
                brute_matched_accuracy(pred, truth)
            )

    def test_never_below_any_fixed_mapping(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            pred = rng.integers(0, 3, size=n)
            truth = rng.integers(0, 3, size=n)
            fixed = float(np.mean(pred == truth))
            assert matched_accuracy(pred, truth) >= fixed - 1e-12

    def test_permutation_invariance_both_sides(self):
        rng = np.random.default_rng(9)
        pred = rng.integers(0, 3, size=12)
        truth = rng.integers(0, 3, size=12)
        perm = {0: 2, 1: 0, 2: 1}
        pred2 = np.array([perm[p] for p in pred])
        truth2 = np.array([perm[t] for t in truth])
        base = matched_accuracy(pred, truth)
        assert matched_accuracy(pred2, truth) == pytest.approx(base)
        assert matched_accuracy(pred, truth2) == pytest.approx(base)
        assert rand_index(pred2, truth) == pytest.approx(rand_index(pred, truth))
