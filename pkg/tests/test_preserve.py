import math
from fractions import Fraction

import pytest

import oracles
from qubodr.core import CapExceededError, QuboMatrix, apply_update, solve_exhaustive
from qubodr.metrics import EntryValues, dr_ratio
from qubodr.preserve import (
    INCLUSION,
    WITNESS,
    ExactIntervalProvider,
    UpdateInterval,
    preserving_interval,
    select_update,
    select_update_scored,
)
from qubodr.problems import make_instance

WIDE = UpdateInterval(-math.inf, math.inf)
EPS = Fraction(1, 7)

GRID = [
    (family, n, seed)
    for family in ("subset_sum", "bin_clustering", "mrf")
    for n, seed in [(4, 0), (4, 1), (5, 2)]
]


def all_actions(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def probe_points(iv: UpdateInterval):
    """A few points inside the interval plus the just-outside failures."""
    inside = [Fraction(0)]
    outside = []
    if iv.lower == -math.inf and iv.upper == math.inf:
        inside += [Fraction(-100), Fraction(100)]
    elif iv.lower == -math.inf:
        inside += [iv.upper, iv.upper - 3]
        outside.append(iv.upper + EPS)
    elif iv.upper == math.inf:
        inside += [iv.lower, iv.lower + 3]
        outside.append(iv.lower - EPS)
    else:
        inside += [iv.lower, iv.upper, (iv.lower + iv.upper) / 2]
        outside += [iv.lower - EPS, iv.upper + EPS]
    return inside, outside


class TestUpdateInterval:
    def test_must_contain_zero(self):
        with pytest.raises(ValueError, match="contain 0"):
            UpdateInterval(Fraction(1), Fraction(2))
        with pytest.raises(ValueError, match="contain 0"):
            UpdateInterval(-math.inf, Fraction(-1))

    def test_membership_and_shape(self):
        iv = UpdateInterval(-math.inf, Fraction(3))
        assert 998 not in iv and 3 in iv and Fraction(-10**9) in iv
        assert not iv.is_point
        assert iv.finite_bounds() == [Fraction(3)]
        assert UpdateInterval(Fraction(0), Fraction(0)).is_point
        assert WIDE.finite_bounds() == []


class TestPreservingInterval:
    def test_single_positive_diagonal(self):
        iv = preserving_interval(QuboMatrix.from_dense([[2]]), (0, 0))
        assert (iv.lower, iv.upper) == (Fraction(-2), math.inf)

    def test_tied_optimum_pins_to_zero(self):
        iv = preserving_interval(QuboMatrix.from_dense([[0]]), (0, 0))
        assert iv.is_point

    def test_example_allows_the_big_pullback(self, ex1):
        iv = preserving_interval(ex1, (1, 1))
        assert iv.lower == -math.inf
        assert iv.upper == 1000 + Fraction(3, 2) - Fraction(0.8)
        assert 998 in iv

    def test_inclusion_soundness_and_maximality(self):
        for family, n, seed in GRID:
            Q = make_instance(family, n, seed).matrix
            ivs = ExactIntervalProvider().intervals(Q, all_actions(n))
            for action, iv in ivs.items():
                inside, outside = probe_points(iv)
                for w in inside:
                    assert w in iv
                    assert oracles.included_after_update(Q, action, w)
                for w in outside:
                    assert w not in iv
                    assert not oracles.included_after_update(Q, action, w)

    def test_witness_soundness_and_maximality(self):
        for family, n, seed in GRID:
            Q = make_instance(family, n, seed).matrix
            witness = solve_exhaustive(Q).sorted_optimizers()[0]
            provider = ExactIntervalProvider(mode=WITNESS)
            ivs = provider.intervals(Q, all_actions(n), witness)
            for action, iv in ivs.items():
                inside, outside = probe_points(iv)
                for w in inside:
                    assert oracles.witness_kept_after_update(Q, action, w, witness)
                for w in outside:
                    assert not oracles.witness_kept_after_update(Q, action, w, witness)

    def test_witness_interval_contains_inclusion_interval(self):
        for family, n, seed in GRID:
            Q = make_instance(family, n, seed).matrix
            witness = solve_exhaustive(Q).sorted_optimizers()[0]
            inc = ExactIntervalProvider().intervals(Q, all_actions(n))
            wit = ExactIntervalProvider(mode=WITNESS).intervals(
                Q, all_actions(n), witness
            )
            for action in inc:
                assert wit[action].lower <= inc[action].lower
                assert wit[action].upper >= inc[action].upper

    def test_zero_always_admissible(self):
        for family, n, seed in GRID:
            Q = make_instance(family, n, seed).matrix
            for iv in ExactIntervalProvider().intervals(Q, all_actions(n)).values():
                assert 0 in iv

    def test_witness_validation(self, ex1):
        provider = ExactIntervalProvider(mode=WITNESS)
        with pytest.raises(ValueError, match="designated optimizer"):
            provider.intervals(ex1, [(0, 0)])
        with pytest.raises(ValueError, match="not an optimizer"):
            provider.intervals(ex1, [(0, 0)], (0, 0))
        with pytest.raises(ValueError, match="length"):
            provider.intervals(ex1, [(0, 0)], (1,))

    def test_mode_validation(self):
        with pytest.raises(ValueError, match="unknown interval mode"):
            ExactIntervalProvider(mode="loose")

    def test_cap(self, ex1):
        with pytest.raises(CapExceededError):
            ExactIntervalProvider(cap=1).intervals(ex1, [(0, 0)])

    def test_intervals_matches_single_queries(self):
        Q = make_instance("mrf", 4, 5).matrix
        provider = ExactIntervalProvider()
        batch = provider.intervals(Q, all_actions(4))
        for action, iv in batch.items():
            assert provider.interval(Q, action) == iv


class TestSelectUpdate:
    def test_merges_extreme_value_onto_neighbor(self):
        # entry (0, 1) sits at 1000; pulling it onto 1 costs less than onto 0
        Q = QuboMatrix.from_entries(2, [(0, 0, 1), (0, 1, 1000)])
        iv = UpdateInterval(-math.inf, Fraction(0))
        w, ratio = select_update_scored(Q, (0, 1), iv)
        assert (w, ratio) == (Fraction(-999), Fraction(1))

    def test_sign_tiebreak_prefers_negative(self):
        Q = QuboMatrix.from_entries(2, [(0, 0, 2), (0, 1, 4)])
        assert select_update(Q, (0, 0), WIDE) == -2

    def test_already_flat_keeps_zero(self):
        assert select_update_scored(QuboMatrix.from_dense([[1]]), (0, 0), WIDE) == (
            Fraction(0), Fraction(1)
        )

    def test_point_interval_returns_zero(self, ex1):
        assert select_update(ex1, (0, 1), UpdateInterval(Fraction(0), Fraction(0))) == 0

    def test_example_greedy_choice(self, ex1):
        # lands the huge diagonal on -3/2; ties with landing on 0 but is closer
        iv = preserving_interval(ex1, (1, 1))
        assert select_update(ex1, (1, 1), iv) == Fraction(1997, 2)

    def test_never_increases_dr(self):
        for family, n, seed in GRID:
            Q = make_instance(family, n, seed).matrix
            before = dr_ratio(Q)
            ivs = ExactIntervalProvider().intervals(Q, all_actions(n))
            for action, iv in ivs.items():
                w = select_update(Q, action, iv)
                assert w in iv
                assert dr_ratio(apply_update(Q, action, w)) <= before

    def test_scored_ratio_matches_recomputation(self):
        for family, n, seed in GRID:
            Q = make_instance(family, n, seed).matrix
            ivs = ExactIntervalProvider().intervals(Q, all_actions(n))
            for action, iv in ivs.items():
                w, ratio = select_update_scored(Q, action, iv)
                assert dr_ratio(apply_update(Q, action, w)) == ratio

    def test_off_lattice_endpoint_is_considered(self):
        # no on-lattice merge fits the interval; the -17/2 endpoint still
        # drags 10 close to the cluster and beats w = 0
        Q = QuboMatrix.from_entries(2, [(0, 0, 1), (0, 1, 10)])
        iv = UpdateInterval(Fraction(-17, 2), Fraction(1, 3))
        w, ratio = select_update_scored(Q, (0, 1), iv)
        assert (w, ratio) == (Fraction(-17, 2), Fraction(3))
        assert dr_ratio(apply_update(Q, (0, 1), w)) == ratio

    def test_precomputed_values_agree(self, ex1):
        iv = preserving_interval(ex1, (1, 1))
        ev = EntryValues.from_matrix(ex1)
        assert select_update(ex1, (1, 1), iv, ev) == select_update(ex1, (1, 1), iv)
