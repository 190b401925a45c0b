import math

import numpy as np
import pytest

from phasefilter.errors import DomainError, ScaleError, ShapeError
from phasefilter.linalg import (
    MATMUL_STRATEGIES,
    MAX_EXP_NORM,
    HermitianInput,
    PrecisionBudget,
    as_matrix,
    as_square,
    as_vector,
    filter_step,
    matmul,
    operator_norm,
    power_by_squaring,
    taylor_exp,
    taylor_tail_bound,
    terms_for_tail,
    truncate,
)


def _rand_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _rand_hermitian(rng, n, scale=0.1):
    g = _rand_complex(rng, (n, n)) * scale
    return (g + g.conj().T) * 0.5


class TestValidators:
    def test_as_vector_accepts_lists(self):
        v = as_vector([1, 2j, 3])
        assert v.dtype == np.complex128 and v.shape == (3,)

    def test_as_vector_rejects_matrix_empty_nan(self):
        with pytest.raises(ShapeError):
            as_vector(np.zeros((2, 2)))
        with pytest.raises(ShapeError):
            as_vector(np.zeros(0))
        with pytest.raises(DomainError):
            as_vector([1.0, np.nan])

    def test_as_matrix_and_square(self):
        m = as_matrix([[1, 2], [3, 4]])
        assert m.flags.c_contiguous
        with pytest.raises(ShapeError):
            as_matrix(np.zeros(3))
        with pytest.raises(ShapeError):
            as_square(np.zeros((2, 3)))
        with pytest.raises(DomainError):
            as_matrix(np.array([[np.inf, 0], [0, 0]]))

    def test_operator_norm_of_unitary_is_one(self):
        rng = np.random.default_rng(5)
        q, _ = np.linalg.qr(_rand_complex(rng, (6, 6)))
        assert operator_norm(q) == pytest.approx(1.0, abs=1e-12)


class TestPrecisionBudget:
    def test_floor_is_eight_bits(self):
        assert PrecisionBudget(8).bits == 8
        for bad in (7, 0, -3, 8.0, "8"):
            with pytest.raises(DomainError):
                PrecisionBudget(bad)


class TestHermitianInput:
    def test_create_symmetrizes_and_freezes(self):
        a = np.array([[0.5, 0.25 + 1e-14j], [0.25, 0.5]], dtype=np.complex128)
        h = HermitianInput.create(a)
        assert np.array_equal(h.matrix, h.matrix.conj().T)
        with pytest.raises(ValueError):
            h.matrix[0, 0] = 9.0
        assert h.n == 2
        # separation gets measured at this scale
        assert h.separation is not None and h.separation > 0

    def test_non_hermitian_rejected(self):
        with pytest.raises(DomainError):
            HermitianInput.create([[0.0, 1.0], [0.0, 0.0]])

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(DomainError, match="PSD"):
            HermitianInput.create(np.diag([0.5, -0.2]).astype(np.complex128))

    def test_understated_norm_bound_rejected(self):
        with pytest.raises(DomainError, match="norm bound"):
            HermitianInput.create(np.diag([0.9, 0.1]).astype(np.complex128), norm_bound=0.5)

    def test_overstated_separation_rejected(self):
        a = np.diag([0.1, 0.2]).astype(np.complex128)
        with pytest.raises(DomainError, match="separation"):
            HermitianInput.create(a, separation=0.5)

    def test_large_matrix_trusts_declared_separation(self):
        n = 90  # above the auto-validation cutoff
        a = np.diag(np.linspace(0.05, 0.95, n)).astype(np.complex128)
        h = HermitianInput.create(a, separation=0.005)
        assert h.separation == 0.005


class TestMatmul:
    def test_strategies_agree(self):
        rng = np.random.default_rng(7)
        for n in (3, 17, 64, 65, 80):
            a = _rand_complex(rng, (n, n))
            b = _rand_complex(rng, (n, n))
            ref = a @ b
            for strat in MATMUL_STRATEGIES:
                got = matmul(a, b, strat)
                assert np.allclose(got, ref, rtol=1e-10, atol=1e-10), (n, strat)

    def test_strassen_above_cutover_nonsquare_padding(self):
        rng = np.random.default_rng(8)
        a = _rand_complex(rng, (65, 67))
        b = _rand_complex(rng, (67, 66))
        assert np.allclose(matmul(a, b, "strassen"), a @ b, rtol=1e-9, atol=1e-9)

    def test_shape_and_strategy_errors(self):
        with pytest.raises(ShapeError):
            matmul(np.zeros((2, 3)), np.zeros((2, 3)))
        with pytest.raises(DomainError):
            matmul(np.eye(2), np.eye(2), "magic")


class TestPowerBySquaring:
    def test_matches_numpy_matrix_power(self):
        rng = np.random.default_rng(9)
        q, _ = np.linalg.qr(_rand_complex(rng, (5, 5)))
        for e in (0, 1, 2, 3, 7, 12, 100, 1023):
            got = power_by_squaring(q, e)
            want = np.linalg.matrix_power(q, e)
            assert np.allclose(got, want, rtol=1e-11, atol=1e-11), e

    def test_exponent_zero_is_identity(self):
        assert np.array_equal(power_by_squaring(np.full((3, 3), 2.0), 0), np.eye(3))

    def test_negative_or_fractional_exponent_rejected(self):
        with pytest.raises(DomainError):
            power_by_squaring(np.eye(2), -1)
        with pytest.raises(DomainError):
            power_by_squaring(np.eye(2), 1.5)

    def test_budget_truncates_intermediates(self):
        # With an 8-bit budget the result lives on the 2^-8 grid.
        rng = np.random.default_rng(10)
        q, _ = np.linalg.qr(_rand_complex(rng, (4, 4)))
        out = power_by_squaring(q, 5, budget=PrecisionBudget(8))
        grid = out * 256.0
        assert np.allclose(grid.real, np.round(grid.real), atol=1e-9)
        assert np.allclose(grid.imag, np.round(grid.imag), atol=1e-9)


class TestTaylor:
    def test_tail_bound_dominates_true_tail(self):
        for x in (0.1, 1.0, 2 * math.pi, 7.9):
            for s in (3, 8, 20, 60):
                true_tail = sum(
                    math.exp(m * math.log(x) - math.lgamma(m + 1))
                    for m in range(s, s + 200)
                )
                assert taylor_tail_bound(x, s) >= true_tail * (1 - 1e-12)

    def test_tail_bound_edges(self):
        assert taylor_tail_bound(0.0, 5) == 0.0
        with pytest.raises(DomainError):
            taylor_tail_bound(-1.0, 5)

    def test_terms_for_tail_is_minimal(self):
        x = 2 * math.pi
        s = terms_for_tail(x, 1e-12)
        assert taylor_tail_bound(x, s) <= 1e-12
        assert taylor_tail_bound(x, s - 1) > 1e-12

    def test_terms_for_tail_errors(self):
        with pytest.raises(DomainError):
            terms_for_tail(1.0, 0.0)
        with pytest.raises(ScaleError):
            terms_for_tail(7.9, 1e-300, max_terms=20)

    def test_taylor_exp_matches_eigendecomposition(self):
        rng = np.random.default_rng(11)
        for n in (2, 5, 9):
            h = _rand_hermitian(rng, n, scale=0.2)
            lam, vec = np.linalg.eigh(h)
            want = (vec * np.exp(2j * np.pi * lam)) @ vec.conj().T
            terms = terms_for_tail(2 * np.pi * np.linalg.norm(h, 2), 1e-14)
            got = taylor_exp(h, terms)
            assert np.abs(got - want).max() < 1e-12

    def test_taylor_exp_accepts_hermitian_input_wrapper(self):
        h = HermitianInput.create(np.diag([0.25, 0.75]).astype(np.complex128))
        got = taylor_exp(h, terms=40)
        want = np.diag(np.exp(2j * np.pi * np.array([0.25, 0.75])))
        assert np.allclose(got, want, atol=1e-14)

    def test_taylor_exp_norm_precondition(self):
        big = np.eye(2) * (MAX_EXP_NORM / (2 * np.pi) + 1.0)
        with pytest.raises(DomainError, match="limit"):
            taylor_exp(big, terms=10)
        with pytest.raises(DomainError):
            taylor_exp(np.eye(2), terms=0)


class TestFilterStep:
    def test_energy_identity(self):
        rng = np.random.default_rng(12)
        v = _rand_complex(rng, 8)
        uv = _rand_complex(rng, 8)
        w0, w1 = filter_step(v, uv)
        lhs = np.linalg.norm(w0) ** 2 + np.linalg.norm(w1) ** 2
        rhs = (np.linalg.norm(v) ** 2 + np.linalg.norm(uv) ** 2) / 2
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_eigenvector_passes_unchanged_at_phase_zero(self):
        v = np.array([1.0, 0.0], dtype=np.complex128)
        w0, w1 = filter_step(v, v)  # U^m v = v
        assert np.array_equal(w0, v)
        assert not w1.any()

    def test_matrix_input_filters_columns(self):
        rng = np.random.default_rng(13)
        v = _rand_complex(rng, (4, 3))
        uv = _rand_complex(rng, (4, 3))
        w0, _ = filter_step(v, uv)
        for k in range(3):
            col0, _ = filter_step(v[:, k], uv[:, k])
            assert np.array_equal(w0[:, k], col0)

    def test_shape_mismatch_and_nan(self):
        with pytest.raises(ShapeError):
            filter_step(np.zeros(3), np.zeros(4))
        with pytest.raises(DomainError):
            filter_step(np.array([np.nan + 0j]), np.array([0j]))


class TestTruncate:
    def test_frozen_two_bit_example(self):
        # 0.6875 -> 0.75 (ties-to-even on 2.75 quarters), 0.0625j -> 0
        out = truncate(np.array([[0.6875 + 0.0625j]]), 2)
        assert out[0, 0] == 0.75 + 0.0j

    def test_53_bits_is_identity_on_unit_box(self):
        rng = np.random.default_rng(14)
        m = (rng.random((6, 6)) - 0.5) + 1j * (rng.random((6, 6)) - 0.5)
        out = truncate(m, PrecisionBudget(53))
        assert np.abs(out - m).max() <= 2.0**-54

    def test_error_bound_per_entry(self):
        rng = np.random.default_rng(15)
        m = _rand_complex(rng, (5, 5))
        for bits in (8, 12, 24, 40):
            out = truncate(m, bits)
            d = out - m
            bound = 2.0**-bits * (0.5 + 1e-12)
            assert np.abs(d.real).max() <= bound and np.abs(d.imag).max() <= bound

    def test_huge_bit_count_copies(self):
        m = np.array([[1 / 3 + 1j / 7]])
        out = truncate(m, 2048)
        assert np.array_equal(out, m) and out is not m

    def test_invalid_bits(self):
        with pytest.raises(DomainError):
            truncate(np.eye(2), 0)
        with pytest.raises(DomainError):
            truncate(np.eye(2), 2.5)
