"""Brute-force eigensolver tests.

The oracle underwrites every accuracy claim elsewhere, so it gets checked
against hand-computable cases and against its own reconstruction identity
rather than against another library.
"""

import itertools
import math

import numpy as np
import pytest

from phasefilter.errors import DomainError, OracleError, ScaleError, ShapeError
from phasefilter.linalg import HermitianInput
from phasefilter.oracle import (
    EigenDecomposition,
    _assign_min_cost,
    jacobi_eigh,
    match_eigenvectors,
    measure_separation,
    oracle_exp,
    phase_distance,
)


def _rand_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _rand_psd(rng, n):
    lams = rng.random(n)
    q, _ = np.linalg.qr(_rand_complex(rng, (n, n)))
    m = (q * lams) @ q.conj().T
    return (m + m.conj().T) * 0.5


class TestJacobiEigh:
    def test_diagonal_matrix_is_fixed_point(self):
        d = jacobi_eigh(np.diag([0.3, 0.1, 0.7]).astype(np.complex128))
        assert np.array_equal(d.eigenvalues, [0.1, 0.3, 0.7])
        # columns are permuted standard basis vectors
        assert np.allclose(np.abs(d.eigenvectors), np.eye(3)[:, [1, 0, 2]])
        assert d.sweeps == 0

    def test_exchange_matrix_frozen(self):
        d = jacobi_eigh(np.array([[0, 1], [1, 0]], dtype=np.complex128))
        assert np.allclose(d.eigenvalues, [-1.0, 1.0], atol=1e-15)
        s = 1.0 / math.sqrt(2.0)
        assert phase_distance(d.eigenvectors[:, 0], [s, -s]) < 1e-14
        assert phase_distance(d.eigenvectors[:, 1], [s, s]) < 1e-14

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(100)
        for n in (2, 5, 16):
            m = _rand_psd(rng, n)
            d = jacobi_eigh(m)
            rebuilt = (d.eigenvectors * d.eigenvalues) @ d.eigenvectors.conj().T
            assert np.abs(rebuilt - m).max() < 1e-10
            assert np.allclose(
                d.eigenvectors.conj().T @ d.eigenvectors, np.eye(n), atol=1e-12
            )
            assert (np.diff(d.eigenvalues) >= 0).all()

    def test_deterministic_and_read_only(self):
        rng = np.random.default_rng(101)
        m = _rand_psd(rng, 6)
        d1 = jacobi_eigh(m)
        d2 = jacobi_eigh(m)
        assert np.array_equal(d1.eigenvalues, d2.eigenvalues)
        assert np.array_equal(d1.eigenvectors, d2.eigenvectors)
        with pytest.raises(ValueError):
            d1.eigenvalues[0] = 99.0

    def test_phase_convention_pins_largest_entry_positive(self):
        rng = np.random.default_rng(102)
        d = jacobi_eigh(_rand_psd(rng, 7))
        for j in range(7):
            col = d.eigenvectors[:, j]
            pivot = col[int(np.argmax(np.abs(col)))]
            assert pivot.imag == pytest.approx(0.0, abs=1e-13)
            assert pivot.real > 0

    def test_non_hermitian_rejected(self):
        with pytest.raises(DomainError):
            jacobi_eigh(np.array([[0.0, 1.0], [0.5, 0.0]]))

    def test_scale_cap(self):
        with pytest.raises(ScaleError):
            jacobi_eigh(np.eye(513, dtype=np.complex128))

    def test_accepts_hermitian_input_wrapper(self):
        h = HermitianInput.create(np.diag([0.2, 0.8]).astype(np.complex128))
        assert np.allclose(jacobi_eigh(h).eigenvalues, [0.2, 0.8])


class TestOracleExp:
    def test_zero_matrix(self):
        assert np.array_equal(oracle_exp(np.zeros((3, 3))), np.eye(3))

    def test_scale_zero_is_identity(self):
        rng = np.random.default_rng(103)
        assert np.allclose(oracle_exp(_rand_psd(rng, 4), scale=0.0), np.eye(4), atol=1e-14)

    def test_semigroup_property(self):
        rng = np.random.default_rng(104)
        m = _rand_psd(rng, 5)
        u1 = oracle_exp(m, scale=1.3)
        u2 = oracle_exp(m, scale=0.9)
        u3 = oracle_exp(m, scale=2.2)
        assert np.abs(u1 @ u2 - u3).max() < 1e-9

    def test_result_is_unitary(self):
        rng = np.random.default_rng(105)
        u = oracle_exp(_rand_psd(rng, 6))
        assert np.allclose(u.conj().T @ u, np.eye(6), atol=1e-12)

    def test_accepts_precomputed_decomposition(self):
        m = np.diag([0.25, 0.5]).astype(np.complex128)
        d = jacobi_eigh(m)
        assert np.allclose(oracle_exp(d), oracle_exp(m))


class TestPhaseDistance:
    def test_identical_and_global_phase(self):
        rng = np.random.default_rng(106)
        v = _rand_complex(rng, 5)
        assert phase_distance(v, v) == 0.0
        rotated = v * np.exp(0.7j)
        assert phase_distance(v, rotated) < 1e-7

    def test_orthogonal_unit_vectors(self):
        e1 = np.array([1.0, 0.0], dtype=np.complex128)
        e2 = np.array([0.0, 1.0], dtype=np.complex128)
        assert phase_distance(e1, e2) == pytest.approx(math.sqrt(2.0))

    def test_45_degree_frozen(self):
        # unit vectors with |<x,y>| = 1/sqrt(2): distance sqrt(2 - sqrt(2))
        x = np.array([1.0, 0.0], dtype=np.complex128)
        y = np.array([1.0, 1.0], dtype=np.complex128) / math.sqrt(2.0)
        assert phase_distance(x, y) == pytest.approx(math.sqrt(2.0 - math.sqrt(2.0)))

    def test_matches_explicit_minimization(self):
        rng = np.random.default_rng(107)
        x = _rand_complex(rng, 4)
        y = _rand_complex(rng, 4)
        grid = min(
            np.linalg.norm(x - np.exp(1j * phi) * y)
            for phi in np.linspace(0, 2 * np.pi, 20001)
        )
        assert phase_distance(x, y) == pytest.approx(grid, abs=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            phase_distance(np.zeros(2), np.zeros(3))


class TestAssignment:
    def test_small_cases_vs_brute_force(self):
        rng = np.random.default_rng(108)
        for trial in range(60):
            k = int(rng.integers(1, 6))
            n = int(rng.integers(k, 7))
            cost = rng.random((k, n))
            if trial % 3 == 0:
                cost = np.round(cost, 1)  # encourage ties
            cols = _assign_min_cost(cost)
            got = cost[np.arange(k), cols].sum()
            assert len(set(cols)) == k
            best = min(
                sum(cost[i, p[i]] for i in range(k))
                for p in itertools.permutations(range(n), k)
            )
            assert got == pytest.approx(best, abs=1e-12), f"trial {trial}"


class TestMatchEigenvectors:
    def test_permuted_phased_columns_match_exactly(self):
        rng = np.random.default_rng(109)
        d = jacobi_eigh(_rand_psd(rng, 6))
        perm = rng.permutation(6)
        cand = d.eigenvectors[:, perm] * np.exp(1j * rng.random(6))
        idx, dist = match_eigenvectors(cand, d)
        assert np.array_equal(idx, perm)
        assert dist.max() < 1e-7

    def test_list_input_stacks_columns_not_rows(self):
        # Regression: a list of vectors must behave exactly like the matrix
        # whose columns are those vectors.
        rng = np.random.default_rng(110)
        d = jacobi_eigh(_rand_psd(rng, 5))
        cols = [d.eigenvectors[:, j] for j in (3, 1, 4)]
        idx_list, dist_list = match_eigenvectors(cols, d)
        idx_mat, dist_mat = match_eigenvectors(np.column_stack(cols), d)
        assert np.array_equal(idx_list, [3, 1, 4])
        assert np.array_equal(idx_list, idx_mat)
        assert np.array_equal(dist_list, dist_mat)

    def test_subset_of_candidates(self):
        rng = np.random.default_rng(111)
        d = jacobi_eigh(_rand_psd(rng, 6))
        idx, dist = match_eigenvectors(d.eigenvectors[:, [2]], d)
        assert idx.tolist() == [2] and dist[0] < 1e-14

    def test_assignment_beats_greedy_on_contested_column(self):
        # Two candidates both closest to eigenvector 0; the matching must
        # give them distinct indices with minimal total cost.
        d = jacobi_eigh(np.diag([0.1, 0.2, 0.3]).astype(np.complex128))
        e0, e1 = d.eigenvectors[:, 0], d.eigenvectors[:, 1]
        a = 0.95 * e0 + math.sqrt(1 - 0.95**2) * e1
        b = 0.90 * e0 + math.sqrt(1 - 0.90**2) * e1
        idx, _ = match_eigenvectors(np.column_stack([a, b]), d)
        assert sorted(idx.tolist()) == [0, 1]

    def test_too_many_or_mismatched_candidates(self):
        d = jacobi_eigh(np.diag([0.1, 0.9]).astype(np.complex128))
        with pytest.raises(ShapeError):
            match_eigenvectors(np.eye(2, 3, dtype=np.complex128), d)
        with pytest.raises(ShapeError):
            match_eigenvectors(np.zeros((3, 1), dtype=np.complex128), d)
        with pytest.raises(ShapeError):
            match_eigenvectors([], d)


class TestMeasureSeparation:
    def test_frozen_values(self):
        assert measure_separation(np.array([0.1, 0.7])) == pytest.approx(0.4)
        assert measure_separation(np.array([0.05, 0.95])) == pytest.approx(0.1)
        assert measure_separation(np.array([0.2, 0.2, 0.8])) == 0.0
        assert measure_separation(np.array([0.42])) == 0.5

    def test_cap_at_half(self):
        assert measure_separation(np.array([0.0, 0.5])) == 0.5

    def test_integer_shift_invariance(self):
        vals = np.array([0.11, 0.37, 0.82])
        assert measure_separation(vals + 3.0) == pytest.approx(measure_separation(vals))

    def test_accepts_decomposition(self):
        d = jacobi_eigh(np.diag([0.25, 0.65]).astype(np.complex128))
        assert measure_separation(d) == pytest.approx(0.4)

    def test_bad_input(self):
        with pytest.raises(ShapeError):
            measure_separation(np.zeros((2, 2)))
        with pytest.raises(ShapeError):
            measure_separation(np.zeros(0))
