import time

import numpy as np
import pytest

from modrec.fastinv import (
    DiagonalizedSystem,
    dense_A,
    dense_difference,
    eigenvalues_DtD,
    mask_spectrum,
    solve_A,
)
from modrec.spectral import out_of_band_indices


def unitary_dft(n):
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


class TestEigenvalues:
    def test_examples(self):
        assert eigenvalues_DtD(8)[0] == 0.0
        assert eigenvalues_DtD(8)[4] == pytest.approx(4.0, abs=1e-15)
        assert eigenvalues_DtD(4)[1] == pytest.approx(2.0, abs=1e-15)

    @pytest.mark.parametrize("n", [5, 16, 32])
    def test_against_dense(self, n):
        D = dense_difference(n)
        dense = np.sort(np.linalg.eigvalsh(D.T @ D))
        np.testing.assert_allclose(dense, np.sort(eigenvalues_DtD(n)), atol=1e-10)

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            eigenvalues_DtD(1)


class TestMaskSpectrum:
    def test_outside_mask_is_zero(self):
        m = out_of_band_indices(8, 2.0)
        lv = mask_spectrum(m)
        assert lv[0] == lv[1] == lv[7] == 0

    def test_self_symmetric_bin(self):
        assert mask_spectrum(out_of_band_indices(8, 2.0))[4] == 8.0

    def test_asymmetric_synthetic(self):
        ind = np.zeros(8)
        ind[1] = 1
        lv = mask_spectrum(ind)
        assert lv[1] == 4.0 and lv[7] == 4.0
        assert np.count_nonzero(lv) == 2

    @pytest.mark.parametrize("n,of", [(64, 4.0), (1024, 6.0), (33, 2.5)])
    def test_symmetric_mask_values(self, n, of):
        m = out_of_band_indices(n, of)
        np.testing.assert_array_equal(mask_spectrum(m), n * m.indicator())


class TestDiagonalizedSystem:
    def test_invariants(self):
        s = DiagonalizedSystem.build(out_of_band_indices(64, 4.0), 2.0)
        assert s.lambda_D[0] == 0 and np.all(s.lambda_D >= 0)
        assert set(np.unique(s.lambda_V)) <= {0.0, 64.0}
        assert np.all(s.lambda_A >= 2.0)
        np.testing.assert_array_equal(s.lambda_A, 2.0 * (s.lambda_D + 1) + s.lambda_V)

    def test_immutable(self):
        s = DiagonalizedSystem.build(out_of_band_indices(16, 2.0), 2.0)
        with pytest.raises(ValueError):
            s.lambda_A[0] = 1.0

    def test_bad_rho(self):
        with pytest.raises(ValueError):
            DiagonalizedSystem.build(out_of_band_indices(16, 2.0), 0.0)


class TestSolve:
    def test_zero(self):
        s = DiagonalizedSystem.build(out_of_band_indices(32, 2.0), 2.0)
        assert np.all(solve_A(np.zeros(32), s) == 0)

    @pytest.mark.parametrize("n", [16, 64])
    @pytest.mark.parametrize("of", [2.0, 4.0])
    @pytest.mark.parametrize("rho", [0.5, 2.0, 10.0])
    def test_matches_dense(self, n, of, rho):
        rng = np.random.default_rng(n + int(of))
        m = out_of_band_indices(n, of)
        s = DiagonalizedSystem.build(m, rho)
        A = dense_A(m, rho)
        for _ in range(5):
            b = rng.standard_normal(n)
            x = solve_A(b, s)
            assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_odd_length(self):
        rng = np.random.default_rng(0)
        m = out_of_band_indices(33, 3.0)
        s = DiagonalizedSystem.build(m, 2.0)
        b = rng.standard_normal(33)
        x = solve_A(b, s)
        assert np.linalg.norm(dense_A(m, 2.0) @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_full_fft_imaginary_residue_small(self):
        rng = np.random.default_rng(1)
        s = DiagonalizedSystem.build(out_of_band_indices(64, 4.0), 2.0)
        b = rng.standard_normal(64)
        full = np.fft.ifft(np.fft.fft(b) / s.lambda_A)
        assert np.linalg.norm(full.imag) <= 1e-10 * np.linalg.norm(full.real)
        np.testing.assert_allclose(full.real, solve_A(b, s), atol=1e-13)

    def test_empty_mask_constant(self):
        s = DiagonalizedSystem.build(np.zeros(16), 2.0)
        assert np.all(s.lambda_V == 0)
        np.testing.assert_allclose(solve_A(np.full(16, 3.0), s), np.full(16, 1.5), atol=1e-14)

    def test_non_finite_rejected(self):
        s = DiagonalizedSystem.build(out_of_band_indices(16, 2.0), 2.0)
        b = np.zeros(16)
        b[3] = np.nan
        with pytest.raises(ValueError):
            solve_A(b, s)
        with pytest.raises(ValueError):
            solve_A(np.zeros(15), s)

    def test_positive_and_self_adjoint(self):
        rng = np.random.default_rng(2)
        s = DiagonalizedSystem.build(out_of_band_indices(128, 3.0), 2.0)
        for _ in range(10):
            x, y = rng.standard_normal(128), rng.standard_normal(128)
            assert np.dot(x, solve_A(x, s)) > 0
            assert np.dot(y, solve_A(x, s)) == pytest.approx(np.dot(x, solve_A(y, s)), rel=1e-10)

    def test_linear_scaling(self):
        rng = np.random.default_rng(3)
        s = DiagonalizedSystem.build(out_of_band_indices(256, 4.0), 2.0)
        b = rng.standard_normal(256)
        for alpha in (-3.0, 0.5, 1e3):
            np.testing.assert_allclose(solve_A(alpha * b, s), alpha * solve_A(b, s), rtol=1e-12, atol=1e-15)


class TestDiagonalization:
    @pytest.mark.parametrize("n", [4, 7, 16, 32])
    def test_reversal_identity(self, n):
        F = unitary_dft(n)
        perm = (-np.arange(n)) % n
        np.testing.assert_allclose(F[perm, :], F.conj(), atol=1e-12)

    @pytest.mark.parametrize("n,of", [(16, 2.0), (32, 3.0), (64, 4.0)])
    def test_simultaneous(self, n, of):
        m = out_of_band_indices(n, of)
        s = DiagonalizedSystem.build(m, 2.0)
        F = unitary_dft(n)
        recon = F.conj().T @ np.diag(s.lambda_A) @ F
        np.testing.assert_allclose(recon.real, dense_A(m, 2.0), atol=1e-10)
        assert np.max(np.abs(recon.imag)) <= 1e-10


def mean_solve_time(n, reps=100):
    rng = np.random.default_rng(n)
    s = DiagonalizedSystem.build(out_of_band_indices(n, 6.0), 2.0)
    rhs = rng.standard_normal((reps, n))
    for b in rhs[:10]:
        solve_A(b, s)
    t0 = time.perf_counter()
    for b in rhs:
        solve_A(b, s)
    return (time.perf_counter() - t0) / reps


def test_complexity_scaling():
    ratios = []
    for _ in range(3):
        ratios.append(mean_solve_time(8192) / mean_solve_time(1024))
    assert min(ratios) <= 12.0
