"""Dense-matrix oracle checks for the FFT fast paths."""

from __future__ import annotations

import numpy as np

from .fastinv import DiagonalizedSystem, dense_A, dense_difference, eigenvalues_DtD, solve_A
from .spectral import PartialDftOperator, dense_V, dense_VR, out_of_band_indices


def _rel(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def check_solve(rng, n=64, of=4.0, rho=2.0, trials=20):
    mask = out_of_band_indices(n, of)
    system = DiagonalizedSystem.build(mask, rho)
    A = dense_A(mask, rho)
    worst = 0.0
    for _ in range(trials):
        b = rng.standard_normal(n)
        worst = max(worst, _rel(solve_A(b, system), np.linalg.solve(A, b)))
    return worst <= 1e-10, f"fast solve vs dense solve (N={n}, OF={of:g}): rel err {worst:.2e}"


def check_adjoint(rng, n=128, of=3.0, trials=10):
    op = PartialDftOperator(out_of_band_indices(n, of))
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(n)
        c = rng.standard_normal(op.m) + 1j * rng.standard_normal(op.m)
        lhs = np.real(np.vdot(c, op.apply(x)))
        rhs = np.dot(x, op.adjoint_real(c))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return worst <= 1e-10, f"adjoint <Vx, c> = <x, Re V^H c> (N={n}): rel err {worst:.2e}"


def check_gram(n=32, of=2.0):
    mask = out_of_band_indices(n, of)
    VR = dense_VR(mask)
    V = dense_V(mask)
    err = float(np.max(np.abs(VR.T @ VR - np.real(V.conj().T @ V))))
    return err <= 1e-12, f"Gram identity V^R^T V^R = Re(V^H V) (N={n}): max err {err:.2e}"


def check_fast_gram(rng, n=64, of=4.0):
    mask = out_of_band_indices(n, of)
    op = PartialDftOperator(mask)
    VR = dense_VR(mask)
    x = rng.standard_normal(n)
    err = _rel(op.gram(x), VR.T @ (VR @ x))
    return err <= 1e-10, f"matrix-free Gram vs dense (N={n}): rel err {err:.2e}"


def check_eigenvalues(n=32):
    D = dense_difference(n)
    dense = np.sort(np.linalg.eigvalsh(D.T @ D))
    err = float(np.max(np.abs(dense - np.sort(eigenvalues_DtD(n)))))
    return err <= 1e-10, f"eig(D^T D) = 4 sin^2(pi k/N) (N={n}): max err {err:.2e}"


def run_all(seed: int = 0):
    """Return a list of ``(passed, description)`` pairs."""
    rng = np.random.default_rng(seed)
    results = []
    for n in (16, 64):
        for of in (2.0, 4.0):
            results.append(check_solve(rng, n, of))
    results.append(check_adjoint(rng))
    results.append(check_gram())
    results.append(check_fast_gram(rng))
    results.append(check_eigenvalues())
    return results
