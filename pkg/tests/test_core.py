import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qubodr.core import (
    CapExceededError,
    EnergyTable,
    QuboMatrix,
    apply_update,
    batch_energy_nums,
    energy,
    optimum_included,
    solve_exhaustive,
)
from qubodr.problems import make_instance

entry_values = st.one_of(
    st.integers(-50, 50),
    st.fractions(min_value=-50, max_value=50, max_denominator=16),
)


@st.composite
def matrices(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    rows = [
        [draw(entry_values) if j >= i else 0 for j in range(n)] for i in range(n)
    ]
    return QuboMatrix.from_dense(rows)


class TestConstruction:
    def test_float_entries_convert_exactly(self):
        Q = QuboMatrix.from_dense([[0.8]])
        assert Q.value(0, 0) == Fraction(3602879701896397, 2**52)
        assert Q.value(0, 0) == Fraction(0.8)

    def test_shared_lattice(self, ex1):
        assert ex1.den == 2**52
        assert ex1.value(0, 1) == Fraction(-3, 2)
        assert ex1.value(1, 1) == -1000

    def test_from_dense_rejects_lower_triangle(self):
        with pytest.raises(ValueError, match="below the diagonal"):
            QuboMatrix.from_dense([[1, 0], [2, 1]])

    def test_from_dense_rejects_non_square(self):
        with pytest.raises(ValueError):
            QuboMatrix.from_dense([[1, 2]])
        with pytest.raises(ValueError):
            QuboMatrix.from_dense([])

    def test_from_dense_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            QuboMatrix.from_dense([[math.inf]])

    def test_from_entries_sparse_defaults_to_zero(self):
        Q = QuboMatrix.from_entries(3, [(0, 2, 5)])
        assert Q.value(0, 2) == 5
        assert Q.value(1, 1) == 0

    def test_from_entries_rejects_duplicates_and_bad_positions(self):
        with pytest.raises(ValueError, match="duplicate"):
            QuboMatrix.from_entries(2, [(0, 0, 1), (0, 0, 2)])
        with pytest.raises(ValueError, match="out of range"):
            QuboMatrix.from_entries(2, [(1, 0, 1)])
        with pytest.raises(ValueError, match="out of range"):
            QuboMatrix.from_entries(2, [(0, 2, 1)])

    def test_large_values_promote_to_object_dtype(self):
        Q = QuboMatrix.from_entries(1, [(0, 0, 2**70)])
        assert Q.nums.dtype == object
        assert Q.value(0, 0) == 2**70

    def test_equality_across_lattices(self):
        a = QuboMatrix.from_entries(1, [(0, 0, Fraction(1, 2))])
        b = a.with_denominator(6)
        assert b.den == 6
        assert a == b
        with pytest.raises(ValueError, match="multiple"):
            a.with_denominator(3)

    def test_nums_are_read_only(self, ex1):
        with pytest.raises(ValueError):
            ex1.nums[0, 0] = 1


class TestEnergy:
    def test_example_pair_energy(self, ex1, ex1p):
        e = energy(ex1, (1, 1))
        assert e == Fraction(0.8) - Fraction(3, 2) - 1000
        assert float(e) == pytest.approx(-1000.7)
        assert float(energy(ex1p, (1, 1))) == pytest.approx(-2.7)

    def test_all_zeros_assignment(self, ex1):
        assert energy(ex1, (0, 0)) == 0

    def test_single_diagonal(self):
        assert energy(QuboMatrix.from_dense([[2]]), (1,)) == 2

    def test_dimension_and_bit_validation(self, ex1):
        with pytest.raises(ValueError, match="length"):
            energy(ex1, (1,))
        with pytest.raises(ValueError, match="0 or 1"):
            energy(ex1, (1, 2))

    @given(matrices())
    @settings(max_examples=60, deadline=None)
    def test_energy_matches_brute_force(self, Q):
        for idx in range(1 << Q.n):
            z = tuple((idx >> i) & 1 for i in range(Q.n))
            assert energy(Q, z) == oracles.brute_energy(Q, z)

    def test_batch_energy_matches_scalar(self):
        Q = make_instance("mrf", 5, 3).matrix
        states = np.array(
            [[(idx >> i) & 1 for i in range(5)] for idx in range(32)]
        )
        nums = batch_energy_nums(Q, states)
        assert [Fraction(v, Q.den) for v in nums] == [
            energy(Q, tuple(row)) for row in states
        ]
        with pytest.raises(ValueError):
            batch_energy_nums(Q, states[:, :3])


class TestSolveExhaustive:
    def test_example_pair_optimizers(self, ex1, ex1p):
        a = solve_exhaustive(ex1)
        b = solve_exhaustive(ex1p)
        assert a.optimizers == {(1, 1)}
        assert b.optimizers == {(1, 1)}
        assert float(a.optimum_energy) == pytest.approx(-1000.7)
        assert float(b.optimum_energy) == pytest.approx(-2.7)

    def test_zero_matrix_ties_on_everything(self):
        res = solve_exhaustive(QuboMatrix.from_dense([[0, 0], [0, 0]]))
        assert res.optimum_energy == 0
        assert len(res.optimizers) == 4

    def test_cap(self):
        Q = QuboMatrix.from_entries(3, [(0, 0, 1)])
        with pytest.raises(CapExceededError):
            solve_exhaustive(Q, cap=2)

    @given(matrices(max_n=5))
    @settings(max_examples=40, deadline=None)
    def test_matches_naive_enumeration(self, Q):
        res = solve_exhaustive(Q)
        opt, opts = oracles.brute_solve(Q)
        assert res.optimum_energy == opt
        assert res.optimizers == opts

    def test_bigint_sweep_agrees_with_int64(self):
        Q = make_instance("subset_sum", 6, 11).matrix
        big = QuboMatrix(Q.n, Q.den, np.array(
            [[int(v) for v in row] for row in Q.nums], dtype=object))
        assert EnergyTable(Q).energies.tolist() == EnergyTable(big).energies
        assert solve_exhaustive(Q) == solve_exhaustive(big)

    def test_huge_magnitudes_stay_exact(self):
        Q = QuboMatrix.from_entries(
            2, [(0, 0, 2**80), (0, 1, -(2**80) - 1), (1, 1, 3)]
        )
        opt, opts = oracles.brute_solve(Q)
        res = solve_exhaustive(Q)
        assert (res.optimum_energy, res.optimizers) == (opt, opts)

    def test_sorted_optimizers_is_lexicographic(self):
        res = solve_exhaustive(QuboMatrix.from_dense([[0, 0], [0, 0]]))
        assert res.sorted_optimizers() == sorted(res.optimizers)


class TestOptimumIncluded:
    def test_example_pair(self, ex1, ex1p):
        assert optimum_included(ex1, ex1p)

    def test_reflexive(self, ex1):
        assert optimum_included(ex1, ex1)

    def test_single_variable_flip(self):
        assert not optimum_included(
            QuboMatrix.from_dense([[-1]]), QuboMatrix.from_dense([[1]])
        )

    def test_dimension_mismatch(self, ex1):
        with pytest.raises(ValueError, match="dimension"):
            optimum_included(ex1, QuboMatrix.from_dense([[1]]))

    @given(matrices(max_n=4))
    @settings(max_examples=30, deadline=None)
    def test_matches_brute_force_relation(self, Q):
        Qp = apply_update(Q, (0, 0), Fraction(1, 3))
        assert optimum_included(Q, Qp) == oracles.brute_optimum_included(Q, Qp)

    def test_transitive_on_sampled_triples(self):
        for seed in range(6):
            Q = make_instance("mrf", 4, seed).matrix
            A = apply_update(Q, (0, 1), Fraction(1, 7))
            B = apply_update(A, (2, 3), Fraction(-1, 5))
            if optimum_included(Q, A) and optimum_included(A, B):
                assert optimum_included(Q, B)


class TestApplyUpdate:
    def test_example_transition(self, ex1, ex1p):
        assert apply_update(ex1, (1, 1), 998) == ex1p

    def test_zero_update_is_identity(self, ex1):
        assert apply_update(ex1, (0, 1), 0) is ex1

    def test_single_entry_write(self):
        Q = QuboMatrix.from_dense([[0, 0], [0, 0]])
        Qp = apply_update(Q, (0, 1), 3)
        assert Qp.value(0, 1) == 3
        assert Qp.value(0, 0) == 0 and Qp.value(1, 1) == 0

    def test_round_trip_is_bitwise(self, ex1):
        Qp = apply_update(apply_update(ex1, (0, 1), Fraction(1, 3)), (0, 1), Fraction(-1, 3))
        assert Qp.den == ex1.den * 3
        assert Qp == ex1
        assert [int(v) * 3 for v in ex1.upper_nums()] == Qp.upper_nums()

    def test_lattice_refinement_preserves_entries(self, ex1):
        Qp = apply_update(ex1, (0, 0), Fraction(1, 3))
        assert Qp.den == ex1.den * 3
        assert Qp.value(0, 0) == ex1.value(0, 0) + Fraction(1, 3)
        assert Qp.value(1, 1) == ex1.value(1, 1)

    def test_overflow_promotes_dtype(self):
        Q = QuboMatrix.from_dense([[1]])
        Qp = apply_update(Q, (0, 0), 2**70)
        assert Qp.nums.dtype == object
        assert Qp.value(0, 0) == 2**70 + 1

    def test_invalid_inputs(self, ex1):
        with pytest.raises(ValueError):
            apply_update(ex1, (1, 0), 1)
        with pytest.raises(ValueError):
            apply_update(ex1, (0, 2), 1)
        with pytest.raises(ValueError, match="finite"):
            apply_update(ex1, (0, 0), math.nan)

    @given(matrices(max_n=4), st.integers(0, 3), st.integers(0, 3),
           st.fractions(min_value=-20, max_value=20, max_denominator=12))
    @settings(max_examples=60, deadline=None)
    def test_energy_shift_identity(self, Q, k, l, w):
        k, l = min(k, Q.n - 1), min(l, Q.n - 1)
        k, l = min(k, l), max(k, l)
        Qp = apply_update(Q, (k, l), w)
        for idx in range(1 << Q.n):
            z = tuple((idx >> i) & 1 for i in range(Q.n))
            assert energy(Qp, z) == energy(Q, z) + w * z[k] * z[l]


class TestEnergyTable:
    def test_action_stats_match_brute_force(self):
        for seed in range(4):
            Q = make_instance("mrf", 4, seed).matrix
            table = EnergyTable(Q)
            nums = oracles.energy_nums(Q)
            assert table.minimum() == min(nums)
            for k in range(4):
                for l in range(k, 4):
                    in_a = [(i >> k) & (i >> l) & 1 for i in range(16)]
                    min_a = min(e for i, e in enumerate(nums) if in_a[i])
                    min_b = min(e for i, e in enumerate(nums) if not in_a[i])
                    emin = min(nums)
                    assert table.action_stats(k, l) == (
                        min_a, min_b, min_a == emin, min_b == emin
                    )

    def test_optimizer_indices_ascending_and_complete(self):
        Q = QuboMatrix.from_dense([[0, 0], [0, 0]])
        assert EnergyTable(Q).optimizer_indices() == [0, 1, 2, 3]
