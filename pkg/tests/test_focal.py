import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_simplex_rows
from softecm.focal import (
    CredalPartition,
    FocalSet,
    enumerate_family,
    hard_assign,
    normalized_specificity,
    parse_focal_label,
    pignistic,
)


def make_partition(c, f_max, masses, include_omega=False):
    fam = enumerate_family(c, f_max, include_omega)
    return CredalPartition(family=fam, masses=np.asarray(masses, dtype=float))


class TestFocalSet:
    def test_members_and_cardinality(self):
        s = FocalSet.from_members([0, 2], universe_size=3)
        assert s.members == (0, 2)
        assert s.cardinality == 2
        assert s.contains(2) and not s.contains(1)

    def test_label_round_trip(self):
        for members in [(), (0,), (0, 2), (1, 2, 3)]:
            s = FocalSet.from_members(members, universe_size=4)
            assert parse_focal_label(s.label(), 4) == s
        assert FocalSet.empty(3).label() == "{}"
        assert FocalSet.from_members([0, 2], 3).label() == "{1,3}"

    def test_member_out_of_range(self):
        with pytest.raises(ValueError):
            FocalSet.from_members([3], universe_size=3)

    def test_bad_label(self):
        with pytest.raises(ValueError):
            parse_focal_label("{1;2}", 3)


class TestEnumerateFamily:
    def test_full_power_set_of_two(self):
        fam = enumerate_family(2, 2, include_omega=True)
        assert fam.labels() == ["{}", "{1}", "{2}", "{1,2}"]
        assert len(fam) == 4

    def test_pairs_capped_without_omega(self):
        fam = enumerate_family(3, 2, include_omega=False)
        assert len(fam) == 7  # 1 empty + 3 singletons + 3 pairs
        assert FocalSet.full(3) not in fam.sets

    def test_pairs_capped_with_omega(self):
        fam = enumerate_family(4, 2, include_omega=True)
        assert len(fam) == 12  # 1 + 4 + 6 + omega
        assert fam.sets[-1] == FocalSet.full(4)

    def test_order_is_cardinality_then_bitmask(self):
        fam = enumerate_family(3, 3)
        labels = fam.labels()
        assert labels == ["{}", "{1}", "{2}", "{3}", "{1,2}", "{1,3}", "{2,3}", "{1,2,3}"]

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            enumerate_family(0, 1)
        with pytest.raises(ValueError):
            enumerate_family(3, 0)
        with pytest.raises(ValueError):
            enumerate_family(3, 4)

    @given(c=st.integers(1, 6), f_max_off=st.integers(0, 5), omega=st.booleans())
    def test_size_matches_binomial_count(self, c, f_max_off, omega):
        f_max = 1 + f_max_off % c
        fam = enumerate_family(c, f_max, omega)
        expected = 1 + sum(math.comb(c, k) for k in range(1, f_max + 1))
        if omega and f_max < c:
            expected += 1
        assert len(fam) == expected


class TestCredalPartition:
    def test_row_sum_enforced(self):
        with pytest.raises(ValueError, match="sums to"):
            make_partition(2, 2, [[0.5, 0.2, 0.2, 0.2]], include_omega=True)

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError):
            make_partition(2, 2, [[-0.2, 0.4, 0.4, 0.4]], include_omega=True)

    def test_mass_of_lookup(self):
        p = make_partition(2, 2, [[0.1, 0.2, 0.3, 0.4]])
        omega = FocalSet.full(2)
        assert p.mass_of(omega)[0] == pytest.approx(0.4)


class TestPignistic:
    def test_total_ignorance_splits_evenly(self):
        p = make_partition(2, 2, [[0.0, 0.0, 0.0, 1.0]])
        assert pignistic(p)[0] == pytest.approx([0.5, 0.5])

    def test_certainty_stays_crisp(self):
        p = make_partition(2, 2, [[0.0, 1.0, 0.0, 0.0]])
        assert pignistic(p)[0] == pytest.approx([1.0, 0.0])

    def test_outlier_share_renormalized(self):
        p = make_partition(2, 2, [[0.5, 0.5, 0.0, 0.0]])
        assert pignistic(p)[0] == pytest.approx([1.0, 0.0])

    def test_all_mass_on_empty_falls_back_to_uniform(self):
        p = make_partition(3, 2, [[1.0] + [0.0] * 6])
        bet, degenerate = pignistic(p, return_degenerate=True)
        assert bet[0] == pytest.approx([1 / 3, 1 / 3, 1 / 3])
        assert degenerate.tolist() == [True]

    @settings(max_examples=50)
    @given(seed=st.integers(0, 10_000), c=st.integers(2, 5))
    def test_rows_sum_to_one(self, seed, c):
        rng = np.random.default_rng(seed)
        fam = enumerate_family(c, min(c, 2), include_omega=True)
        masses = random_simplex_rows(rng, 12, len(fam))
        p = CredalPartition(family=fam, masses=masses)
        rows = pignistic(p).sum(axis=1)
        assert np.allclose(rows, 1.0, atol=1e-9)


class TestHardAssign:
    def test_tie_breaks_to_lowest_index(self):
        p = make_partition(2, 2, [[0.0, 0.0, 0.0, 1.0]])
        assert hard_assign(p).tolist() == [0]

    def test_crisp_row(self):
        p = make_partition(2, 2, [[0.0, 0.0, 1.0, 0.0]])
        assert hard_assign(p).tolist() == [1]

    def test_identity_like_partition(self):
        eye = np.zeros((3, 8))
        for i in range(3):
            eye[i, 1 + i] = 1.0
        p = make_partition(3, 3, eye)
        assert hard_assign(p).tolist() == [0, 1, 2]

    @settings(max_examples=50)
    @given(seed=st.integers(0, 10_000), scale=st.floats(0.05, 0.95))
    def test_invariant_under_empty_mass_renormalization(self, seed, scale):
        # shrinking all non-empty masses by a common factor (the rest going
        # to the empty set) must not change the pignistic argmax
        rng = np.random.default_rng(seed)
        fam = enumerate_family(3, 2, include_omega=True)
        base = random_simplex_rows(rng, 10, len(fam))
        base[:, 0] = 0.0
        base /= base.sum(axis=1, keepdims=True)
        p1 = CredalPartition(family=fam, masses=base)

        scaled = base * scale
        scaled[:, 0] = 1.0 - scaled[:, 1:].sum(axis=1)
        p2 = CredalPartition(family=fam, masses=scaled)
        assert hard_assign(p1).tolist() == hard_assign(p2).tolist()


class TestNormalizedSpecificity:
    def test_singletons_only_is_precise(self):
        p = make_partition(2, 2, [[0.0, 0.4, 0.6, 0.0], [0.0, 1.0, 0.0, 0.0]])
        assert normalized_specificity(p) == pytest.approx(0.0)

    def test_total_ignorance_is_one(self):
        p = make_partition(2, 2, [[0.0, 0.0, 0.0, 1.0]])
        assert normalized_specificity(p) == pytest.approx(1.0)

    def test_linear_in_mass(self):
        p = make_partition(2, 2, [[0.0, 0.5, 0.0, 0.5]])
        assert normalized_specificity(p) == pytest.approx(0.5)

    def test_single_cluster_rejected(self):
        fam = enumerate_family(1, 1)
        p = CredalPartition(family=fam, masses=np.array([[0.3, 0.7]]))
        with pytest.raises(ValueError):
            normalized_specificity(p)

    @settings(max_examples=50)
    @given(seed=st.integers(0, 10_000), c=st.integers(2, 5), n=st.integers(1, 8))
    def test_always_within_unit_interval(self, seed, c, n):
        rng = np.random.default_rng(seed)
        fam = enumerate_family(c, c, include_omega=True)
        p = CredalPartition(family=fam, masses=random_simplex_rows(rng, n, len(fam)))
        value = normalized_specificity(p)
        assert 0.0 <= value <= 1.0 + 1e-12
