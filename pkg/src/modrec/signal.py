"""Test-signal generation, clipping, modulo folding, noise and error metrics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class BandlimitedSignal:
    """Real samples of a bandlimited signal plus the sampling metadata."""

    samples: np.ndarray
    sample_period: float = 0.01
    oversampling_factor: float = 6.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("samples must be a 1-D array")
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def peak_amplitude(self) -> float:
        return float(np.max(np.abs(self.samples)))

    @property
    def bandlimit_hz(self) -> float:
        return 1.0 / (2.0 * self.sample_period * self.oversampling_factor)


@dataclass(frozen=True)
class FoldedSamples:
    """Modulo-folded samples. ``lam`` is the folding threshold."""

    samples: np.ndarray
    lam: float
    noisy: bool = False

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if self.lam <= 0:
            raise ValueError(f"folding threshold must be positive, got {self.lam}")

    @property
    def n_samples(self) -> int:
        return self.samples.size


def generate_test_signal(
    seed: int,
    n_samples: int = 1024,
    oversampling_factor: float = 6.0,
    num_tones: int = 5,
    on_grid: bool = True,
    sample_period: float = 0.01,
) -> BandlimitedSignal:
    """Sum of random sinusoids below the bandlimit, peak-normalized to 1.

    Amplitudes are uniform on (0, 1], phases uniform on [0, 2*pi). With
    ``on_grid`` each frequency is an integer DFT bin ``k`` with
    ``k < N / (2 * OF)`` so the spectrum is exactly zero on the out-of-band
    set; otherwise frequencies are uniform on (0, bandlimit) Hz and leak.
    """
    if num_tones < 1:
        raise ValueError("num_tones must be at least 1")
    if oversampling_factor <= 1:
        raise ValueError(f"oversampling factor must exceed 1, got {oversampling_factor}")
    if n_samples < 8:
        raise ValueError("n_samples must be at least 8")

    rng = np.random.default_rng(seed)
    amps = 1.0 - rng.random(num_tones)  # (0, 1]
    phases = rng.uniform(0.0, 2 * np.pi, num_tones)
    n = np.arange(n_samples)
    if on_grid:
        k_max = _max_inband_bin(n_samples, oversampling_factor)
        if k_max < 1:
            raise ValueError(
                f"no in-band DFT bin for N={n_samples}, OF={oversampling_factor}"
            )
        bins = rng.integers(1, k_max + 1, num_tones)
        cycles_per_sample = bins / n_samples
    else:
        nyq_fraction = 1.0 / (2.0 * oversampling_factor)
        cycles_per_sample = rng.uniform(0.0, nyq_fraction, num_tones)

    x = np.sin(2 * np.pi * np.outer(cycles_per_sample, n) + phases[:, None])
    samples = amps @ x
    samples /= np.max(np.abs(samples))
    return BandlimitedSignal(samples, sample_period, oversampling_factor)


def _max_inband_bin(n_samples, oversampling_factor):
    # largest k with 2k*OF < N; strict so the cutoff bin is never used
    cutoff = Fraction(n_samples) / (2 * Fraction(oversampling_factor))
    k = math.ceil(cutoff) - 1
    return int(k)


def clip(signal, lam: float) -> np.ndarray:
    """Clamp to ``[-lam, lam]``."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return np.clip(np.asarray(signal, dtype=float), -lam, lam)


def _fold(x, lam):
    x = np.asarray(x, dtype=float)
    period = 2.0 * lam
    r = np.mod(x + lam, period)
    # np.mod can round a tiny negative remainder up to the period itself
    r = np.where(r >= period, 0.0, r)
    # samples already inside the range pass through bit-exactly
    return np.where((x >= -lam) & (x < lam), x, r - lam)


def modulo_fold(signal, lam: float, noisy: bool = False) -> FoldedSamples:
    """Fold into the half-open range ``[-lam, lam)`` using a floored modulo."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return FoldedSamples(_fold(signal, lam), lam, noisy)


def residual(folded: FoldedSamples, original) -> np.ndarray:
    """Residual ``z = f_lam - f``. Multiples of ``2 lam`` when noiseless."""
    f = original.samples if isinstance(original, BandlimitedSignal) else np.asarray(original, float)
    if f.shape != folded.samples.shape:
        raise ValueError(
            f"length mismatch: folded has {folded.samples.size}, original has {f.size}"
        )
    return folded.samples - f


def add_awgn(samples, snr_db: float, reference_power: float, seed: int) -> np.ndarray:
    """Add white Gaussian noise of power ``reference_power * 10**(-snr_db/10)``.

    ``snr_db = inf`` returns a copy of the input.
    """
    samples = np.asarray(samples, dtype=float)
    if math.isinf(snr_db) and snr_db > 0:
        return samples.copy()
    if reference_power <= 0:
        raise ValueError("reference_power must be positive")
    sigma = math.sqrt(reference_power * 10.0 ** (-snr_db / 10.0))
    rng = np.random.default_rng(seed)
    return samples + sigma * rng.standard_normal(samples.shape)


def signal_power(samples) -> float:
    samples = np.asarray(samples, dtype=float)
    return float(np.mean(samples**2))


def nmse(original, estimate) -> float:
    """``||f - f_est||^2 / ||f||^2``."""
    f = np.asarray(original, dtype=float)
    g = np.asarray(estimate, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"length mismatch: {f.shape} vs {g.shape}")
    denom = float(np.dot(f, f))
    if denom == 0.0:
        raise ValueError("NMSE undefined for an all-zero original")
    d = f - g
    return float(np.dot(d, d)) / denom


def nmse_db(original, estimate) -> float:
    """NMSE in dB; ``-inf`` for a perfect estimate."""
    val = nmse(original, estimate)
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(val))


def write_signal_csv(path, samples) -> None:
    """Write ``n,value`` rows with 17 significant digits (exact round-trip)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "value"])
        for i, v in enumerate(np.asarray(samples, dtype=float)):
            w.writerow([i, f"{v:.17g}"])


def read_signal_csv(path) -> np.ndarray:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["n", "value"]:
            raise ValueError(f"{path}: expected header 'n,value', got {header}")
        rows = [(int(r[0]), float(r[1])) for r in reader if r]
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: sample indices are not 0..N-1")
    return np.array([r[1] for r in rows], dtype=float)
