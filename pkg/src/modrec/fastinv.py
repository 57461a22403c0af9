"""FFT solve of ``A x = b`` with ``A = rho (D^T D + I) + V^R^T V^R``.

``D`` is the circular forward difference, so ``D^T D`` is circulant, and the
real Gram matrix of the partial DFT is diagonal in the Fourier basis with
the mask averaged over each ``k``/``-k`` pair. With the unnormalized DFT
rows, ``V^R^T V^R = N F^H diag(lambda_V / N) F`` for the unitary ``F``, so
the mask spectrum here carries the factor ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import FrequencyMask, dense_VR


def eigenvalues_DtD(n_samples: int) -> np.ndarray:
    """``4 sin^2(pi k / N)`` for ``k = 0..N-1``."""
    if n_samples < 2:
        raise ValueError("need N >= 2")
    k = np.arange(n_samples)
    return 4.0 * np.sin(np.pi * k / n_samples) ** 2


def mask_spectrum(mask) -> np.ndarray:
    """``N (m_k + m_{-k mod N}) / 2`` for a mask given as a FrequencyMask or 0/1 vector."""
    if isinstance(mask, FrequencyMask):
        ind = mask.indicator()
    else:
        ind = np.asarray(mask, dtype=float)
    n = ind.size
    reversed_ind = ind[(-np.arange(n)) % n]
    return n * 0.5 * (ind + reversed_ind)


@dataclass(frozen=True)
class DiagonalizedSystem:
    n_samples: int
    rho: float
    lambda_D: np.ndarray
    lambda_V: np.ndarray
    lambda_A: np.ndarray

    @classmethod
    def build(cls, mask, rho: float) -> "DiagonalizedSystem":
        if rho <= 0:
            raise ValueError(f"rho must be positive, got {rho}")
        lam_v = mask_spectrum(mask)
        n = lam_v.size
        lam_d = eigenvalues_DtD(n)
        lam_a = rho * (lam_d + 1.0) + lam_v
        for arr in (lam_d, lam_v, lam_a):
            arr.setflags(write=False)
        return cls(n, float(rho), lam_d, lam_v, lam_a)


def solve_A(rhs, system: DiagonalizedSystem) -> np.ndarray:
    """Return ``A^{-1} rhs`` via FFT, division by ``lambda_A`` and inverse FFT."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (system.n_samples,):
        raise ValueError(
            f"rhs must have shape ({system.n_samples},), got {rhs.shape}"
        )
    if not np.all(np.isfinite(rhs)):
        raise ValueError("rhs contains non-finite values")
    # lambda_A is reversal-symmetric, so the real-input transform pair is exact
    spec = np.fft.rfft(rhs)
    spec /= system.lambda_A[: spec.size]
    return np.fft.irfft(spec, n=system.n_samples)


def dense_difference(n_samples: int) -> np.ndarray:
    """Circular difference matrix: -1 on the diagonal, +1 at ``(i, i+1 mod N)``."""
    D = -np.eye(n_samples)
    for i in range(n_samples):
        D[i, (i + 1) % n_samples] = 1.0
    return D


def dense_A(mask: FrequencyMask, rho: float) -> np.ndarray:
    """Explicit ``rho (D^T D + I) + V^R^T V^R`` (test oracle)."""
    D = dense_difference(mask.n_samples)
    VR = dense_VR(mask)
    return rho * (D.T @ D + np.eye(mask.n_samples)) + VR.T @ VR
