import math

import numpy as np
import pytest

from phasefilter.errors import DomainError
from phasefilter.linalg import HermitianInput
from phasefilter.randomness import (
    MAX_CDF_BITS,
    PerturbationSpec,
    RngHandle,
    gaussian_cdf,
    gaussian_hermitian,
    gaussian_inverse_cdf,
    haar_unit_vector,
    perturb,
)


class TestRngHandle:
    def test_same_seed_same_stream(self):
        a = RngHandle(12345).generator.random(10)
        b = RngHandle(12345).generator.random(10)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        a = RngHandle(1).generator.random(10)
        b = RngHandle(2).generator.random(10)
        assert not np.array_equal(a, b)

    def test_children_are_reproducible_and_distinct(self):
        root = RngHandle(777)
        c0 = root.child(0).generator.random(8)
        c1 = root.child(1).generator.random(8)
        again = RngHandle(777).child(0).generator.random(8)
        assert np.array_equal(c0, again)
        assert not np.array_equal(c0, c1)

    def test_child_does_not_disturb_parent(self):
        a = RngHandle(5)
        a.child(3)
        b = RngHandle(5)
        assert np.array_equal(a.generator.random(4), b.generator.random(4))

    def test_grandchildren(self):
        r = RngHandle(9).child(1).child(2)
        assert r.spawn_key == (1, 2)

    def test_bad_seed_and_index(self):
        for bad in (-1, 2**64, 1.5, "7"):
            with pytest.raises(DomainError):
                RngHandle(bad)
        with pytest.raises(DomainError):
            RngHandle(0).child(-1)


class TestPerturbationSpec:
    def test_scale(self):
        assert PerturbationSpec(0.1, 3).scale == pytest.approx(1e-3)

    def test_validation(self):
        with pytest.raises(DomainError):
            PerturbationSpec(0.0, 2)
        with pytest.raises(DomainError):
            PerturbationSpec(1.0, 2)
        with pytest.raises(DomainError):
            PerturbationSpec(0.5, 1)
        with pytest.raises(DomainError):
            PerturbationSpec(1e-300, 2)  # underflows to zero


class TestHaarUnitVector:
    def test_unit_norm_many_dims(self):
        rng = RngHandle(42)
        for n in (1, 2, 7, 33):
            v = haar_unit_vector(n, rng)
            assert v.shape == (n,)
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_coordinate_mass_is_uniform_on_average(self):
        # E|<e_k, v>|^2 = 1/n for every coordinate under rotation invariance.
        n, trials = 4, 4000
        rng = RngHandle(314)
        mass = np.zeros(n)
        for _ in range(trials):
            mass += np.abs(haar_unit_vector(n, rng)) ** 2
        mass /= trials
        assert np.abs(mass - 1.0 / n).max() < 0.02

    def test_bad_dimension(self):
        with pytest.raises(DomainError):
            haar_unit_vector(0, RngHandle(1))


class TestGaussianHermitian:
    def test_exactly_hermitian(self):
        m = gaussian_hermitian(6, RngHandle(8))
        assert np.array_equal(m, m.conj().T)

    def test_entry_statistics(self):
        # diagonal entries are N(0, 4); rough variance check over many draws
        rng = RngHandle(2020)
        diags = np.concatenate([np.diagonal(gaussian_hermitian(8, rng.child(k))).real
                                for k in range(400)])
        assert abs(diags.var() - 4.0) < 0.4
        assert abs(diags.mean()) < 0.1


class TestPerturb:
    def test_bookkeeping_and_weyl_bound(self):
        base = HermitianInput.create(np.diag([0.1, 0.5, 0.9]).astype(np.complex128))
        spec = PerturbationSpec(0.1, 4)
        out = perturb(base, spec, RngHandle(55))
        assert out.perturbation_norm is not None and out.perturbation_norm > 0
        assert out.norm_bound == pytest.approx(base.norm_bound + out.perturbation_norm)
        assert out.separation == pytest.approx(
            max(base.separation - 2 * out.perturbation_norm, 0.0)
        )
        assert np.array_equal(out.matrix, out.matrix.conj().T)
        # eigenvalues move by at most the realized noise norm
        before = np.linalg.eigvalsh(base.matrix)
        after = np.linalg.eigvalsh(out.matrix)
        assert np.abs(after - before).max() <= out.perturbation_norm + 1e-12

    def test_separation_floors_at_zero(self):
        base = HermitianInput.create(np.diag([0.5, 0.5 + 1e-9]).astype(np.complex128))
        out = perturb(base, PerturbationSpec(0.5, 2), RngHandle(66))
        assert out.separation == 0.0


class TestGaussianCdf:
    def test_frozen_values(self):
        assert gaussian_cdf(0.0) == 0.5
        assert gaussian_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-12)
        assert gaussian_cdf(-1.0) + gaussian_cdf(1.0) == pytest.approx(1.0, abs=1e-15)

    def test_monotone(self):
        xs = np.linspace(-6, 6, 101)
        ys = [gaussian_cdf(float(x)) for x in xs]
        assert all(a < b for a, b in zip(ys, ys[1:]))


class TestGaussianInverseCdf:
    def test_roundtrip_accuracy(self):
        for z in (0.5, 0.158655, 0.841345, 0.999, 1e-6, 1 - 1e-6, 0.123456789):
            x = gaussian_inverse_cdf(z, MAX_CDF_BITS)
            assert abs(gaussian_cdf(x) - z) <= 2.0**-MAX_CDF_BITS

    def test_symmetry(self):
        x = gaussian_inverse_cdf(0.2, 40)
        y = gaussian_inverse_cdf(0.8, 40)
        assert x == pytest.approx(-y, abs=1e-10)

    def test_median(self):
        assert gaussian_inverse_cdf(0.5, 30) == pytest.approx(0.0, abs=1e-9)

    def test_bits_out_of_range(self):
        with pytest.raises(DomainError):
            gaussian_inverse_cdf(0.3, MAX_CDF_BITS + 1)
        with pytest.raises(DomainError):
            gaussian_inverse_cdf(0.3, 0)

    def test_z_out_of_range(self):
        for bad in (0.0, 1.0, -0.2, 2):
            with pytest.raises(DomainError):
                gaussian_inverse_cdf(bad, 20)
