"""Difference-domain baseline (LASSO-B2R2).

The first difference of the folded samples is observed on the out-of-band
bins, the sparse residual difference is recovered by ISTA, snapped to the
``2 lam`` grid and integrated back by a cumulative sum. Any error in one
recovered difference shifts every later sample.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fsr import round_to_grid, soft_threshold
from .result import ReconResult
from .signal import FoldedSamples, nmse
from .spectral import FrequencyMask, PartialDftOperator


@dataclass(frozen=True)
class IstaParams:
    """ISTA settings.

    ``gamma=None`` means ``gamma_fraction * gamma_max`` where ``gamma_max`` is
    the smallest weight whose LASSO solution is all zeros. ``step_size=None``
    means ``1/N``, the exact inverse Lipschitz constant.
    """

    gamma: Optional[float] = None
    gamma_fraction: float = 0.1
    max_iters: int = 150
    step_size: Optional[float] = None
    round_differences: bool = True

    def __post_init__(self):
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if not self.gamma_fraction > 0:
            raise ValueError("gamma_fraction must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive")


def first_difference(x) -> np.ndarray:
    """``out[0] = x[0]``, ``out[n] = x[n] - x[n-1]`` (zero before the start)."""
    x = np.asarray(x, dtype=float)
    return np.diff(x, prepend=0.0)


def cumulative_sum(zhat) -> np.ndarray:
    return np.cumsum(np.asarray(zhat, dtype=float))


def lasso_objective(zhat, observed, operator: PartialDftOperator, gamma: float) -> float:
    r = operator.forward_real(zhat) - observed
    return float(0.5 * np.dot(r, r) + gamma * np.abs(zhat).sum())


def gamma_max(observed, operator: PartialDftOperator) -> float:
    """``||V^R^T b||_inf``; any larger weight yields the zero solution."""
    return float(np.max(np.abs(operator.adjoint_stacked(observed))))


def resolve_gamma(params: IstaParams, observed, operator) -> float:
    if params.gamma is not None:
        return params.gamma
    return params.gamma_fraction * gamma_max(observed, operator)


def ista_solve(observed, operator: PartialDftOperator, params: IstaParams, objective=None):
    """Run ``params.max_iters`` ISTA steps from zero and return the final iterate.

    If ``objective`` is a list, the objective of every iterate (starting
    with the zero vector) is appended to it.
    """
    observed = np.asarray(observed, dtype=float)
    n = operator.n
    lipschitz = float(n)  # largest eigenvalue of V^R^T V^R is exactly N
    step = params.step_size if params.step_size is not None else 1.0 / lipschitz
    if step > 1.0 / lipschitz * (1 + 1e-12):
        raise ValueError(f"step_size {step} exceeds 1/L = {1.0 / lipschitz}")
    gamma = resolve_gamma(params, observed, operator)

    zhat = np.zeros(n)
    for _ in range(params.max_iters):
        resid = operator.forward_real(zhat) - observed
        if objective is not None:
            objective.append(0.5 * float(np.dot(resid, resid)) + gamma * np.abs(zhat).sum())
        grad = operator.adjoint_stacked(resid)
        zhat = soft_threshold(zhat - step * grad, step * gamma)
    if objective is not None:
        objective.append(lasso_objective(zhat, observed, operator, gamma))
    return zhat


def reconstruct_lasso_b2r2(
    folded: FoldedSamples,
    mask: FrequencyMask,
    params: IstaParams = IstaParams(),
) -> ReconResult:
    n = folded.n_samples
    if mask.n_samples != n:
        raise ValueError(f"mask is for N={mask.n_samples}, samples have N={n}")
    operator = PartialDftOperator(mask)

    t0 = time.perf_counter()
    observed = operator.forward_real(first_difference(folded.samples))
    history: list = []
    zhat = ista_solve(observed, operator, params, objective=history)
    zhat_used = round_to_grid(zhat, folded.lam) if params.round_differences else zhat
    z = cumulative_sum(zhat_used)
    f_est = folded.samples - z
    elapsed = time.perf_counter() - t0

    return ReconResult(
        z=z,
        f_est=f_est,
        z_raw=cumulative_sum(zhat),
        iterations=params.max_iters,
        runtime_s=elapsed,
        objective=history,
    )


def tune_gamma_fraction(instances, mask: FrequencyMask, fractions=(1e-3, 1e-2, 1e-1, 1.0), base=IstaParams()):
    """Pick the ``gamma_fraction`` with the lowest mean NMSE.

    ``instances`` is an iterable of ``(original_samples, folded)`` pairs with
    known ground truth, e.g. seeded calibration signals.
    """
    instances = list(instances)
    if not instances:
        raise ValueError("need at least one calibration instance")
    scores = {}
    for frac in fractions:
        params = IstaParams(
            gamma=None,
            gamma_fraction=frac,
            max_iters=base.max_iters,
            step_size=base.step_size,
            round_differences=base.round_differences,
        )
        errs = [nmse(f, reconstruct_lasso_b2r2(fo, mask, params).f_est) for f, fo in instances]
        scores[frac] = float(np.mean(errs))
    best = min(scores, key=scores.get)
    return best, scores
