"""Out-of-band frequency mask and the partial-DFT observation operator.

The operator uses the unnormalized DFT, ``v[k, n] = exp(-2j*pi*k*n/N)``,
restricted to the rows ``k`` in the out-of-band set. Real-stacked forms
concatenate real and imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np


@dataclass(frozen=True)
class FrequencyMask:
    """Out-of-band DFT bins ``k_min..k_max`` (always a contiguous range).

    A bin ``k`` belongs to the mask iff ``pi/OF < 2*pi*k/N < 2*pi - pi/OF``.
    The range is symmetric under ``k -> N - k``.
    """

    n_samples: int
    oversampling_factor: float
    k_min: int
    k_max: int

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def m_size(self) -> int:
        return self.k_max - self.k_min + 1

    def __contains__(self, k) -> bool:
        return self.k_min <= k <= self.k_max

    def indicator(self) -> np.ndarray:
        """Length-N 0/1 vector, 1 on the mask bins."""
        out = np.zeros(self.n_samples)
        out[self.k_min : self.k_max + 1] = 1.0
        return out


def out_of_band_indices(n_samples: int, oversampling_factor: float) -> FrequencyMask:
    """Build the out-of-band mask; raises ``ValueError`` if it would be empty."""
    if n_samples < 4:
        raise ValueError(f"need at least 4 samples, got {n_samples}")
    if not oversampling_factor > 1:
        raise ValueError(f"oversampling factor must exceed 1, got {oversampling_factor}")
    # exact rational arithmetic keeps the strict inequality exact at the cutoff
    cutoff = Fraction(n_samples) / (2 * Fraction(oversampling_factor))
    k_min = math.floor(cutoff) + 1
    k_max = n_samples - k_min
    if k_min > k_max:
        raise ValueError(
            f"empty out-of-band set for N={n_samples}, OF={oversampling_factor}"
        )
    return FrequencyMask(n_samples, float(oversampling_factor), k_min, k_max)


class PartialDftOperator:
    """Matrix-free partial DFT ``V`` and its real-stacked form ``V^R``.

    Immutable; every call allocates its own work arrays.
    """

    def __init__(self, mask: FrequencyMask):
        self.mask = mask
        self.n = mask.n_samples
        self.m = mask.m_size
        self._sl = slice(mask.k_min, mask.k_max + 1)

    def __repr__(self):
        return f"PartialDftOperator(N={self.n}, M={self.m})"

    def _check_len(self, x, expected, what):
        if x.shape != (expected,):
            raise ValueError(f"{what} must have shape ({expected},), got {x.shape}")

    def apply(self, x) -> np.ndarray:
        """``V x`` as a complex vector of length M."""
        x = np.asarray(x, dtype=float)
        self._check_len(x, self.n, "x")
        return np.fft.fft(x)[self._sl]

    def adjoint_real(self, c) -> np.ndarray:
        """``Re(V^H c)``, equal to ``V^R.T @ real_stack(c)``."""
        c = np.asarray(c, dtype=complex)
        self._check_len(c, self.m, "c")
        full = np.zeros(self.n, dtype=complex)
        full[self._sl] = c
        return self.n * np.fft.ifft(full).real

    def forward_real(self, x) -> np.ndarray:
        """``V^R x``, length 2M."""
        return real_stack(self.apply(x))

    def adjoint_stacked(self, r) -> np.ndarray:
        """``V^R.T r`` for a length-2M real vector."""
        r = np.asarray(r, dtype=float)
        self._check_len(r, 2 * self.m, "r")
        return self.adjoint_real(unstack(r))

    def gram(self, x) -> np.ndarray:
        """``V^R.T V^R x = Re(V^H V x)``."""
        x = np.asarray(x, dtype=float)
        self._check_len(x, self.n, "x")
        spec = np.fft.fft(x)
        mask = np.zeros(self.n)
        mask[self._sl] = 1.0
        return self.n * np.fft.ifft(spec * mask).real


def apply_V(x, mask: FrequencyMask) -> np.ndarray:
    return PartialDftOperator(mask).apply(x)


def apply_V_adjoint_real(c, mask: FrequencyMask) -> np.ndarray:
    return PartialDftOperator(mask).adjoint_real(c)


def real_stack(c) -> np.ndarray:
    """``[Re c; Im c]``."""
    c = np.asarray(c)
    return np.concatenate([c.real, c.imag]).astype(float)


def unstack(r) -> np.ndarray:
    """Inverse of :func:`real_stack`."""
    r = np.asarray(r, dtype=float)
    if r.size % 2:
        raise ValueError("stacked vector must have even length")
    m = r.size // 2
    return r[:m] + 1j * r[m:]


def folded_spectrum(folded, mask: FrequencyMask) -> np.ndarray:
    """Out-of-band DFT coefficients of the folded samples."""
    return apply_V(folded.samples, mask)


def dense_V(mask: FrequencyMask) -> np.ndarray:
    """Explicit M x N partial DFT matrix built entry by entry (test oracle)."""
    k = mask.indices[:, None]
    n = np.arange(mask.n_samples)[None, :]
    # reduce k*n mod N first so large products do not lose phase accuracy
    return np.exp(-2j * np.pi * ((k * n) % mask.n_samples) / mask.n_samples)


def dense_VR(mask: FrequencyMask) -> np.ndarray:
    V = dense_V(mask)
    return np.vstack([V.real, V.imag])
