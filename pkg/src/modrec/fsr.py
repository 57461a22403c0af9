"""Fused sparse reconstruction (FSR) of the residual by ADMM.

Solves

    min_z  1/2 ||b - V^R z||^2 + gamma1 ||D z||_1 + gamma2 ||z||_1

with the splitting ``Phi z = u``, ``Phi = [D; I]``, scaled duals ``y`` and
an FFT-diagonal z-update. The recovered residual is snapped to the
``2 lam`` grid once, after the last iteration.
"""

from __future__ import annotations

import collections
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .fastinv import DiagonalizedSystem, solve_A
from .result import ReconResult
from .signal import FoldedSamples
from .spectral import FrequencyMask, PartialDftOperator


@dataclass(frozen=True)
class FsrParams:
    gamma1: float = 1.0
    gamma2: float = 0.01
    rho: float = 2.0
    max_iters: int = 150
    init_seed: int = 0
    tolerance: Optional[float] = None
    history: int = 1000

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "rho"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tolerance is not None and self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.history < 1:
            raise ValueError("history must be at least 1")


def circular_difference(x) -> np.ndarray:
    """``(D x)[i] = x[(i+1) mod N] - x[i]``."""
    x = np.asarray(x, dtype=float)
    return np.roll(x, -1) - x


def circular_difference_adjoint(w) -> np.ndarray:
    """``(D^T w)[j] = w[j-1] - w[j]`` (indices mod N)."""
    w = np.asarray(w, dtype=float)
    return np.roll(w, 1) - w


def soft_threshold(x, tau: float) -> np.ndarray:
    """Proximal operator of ``tau * ||.||_1``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def fsr_objective(z, observed, operator: PartialDftOperator, params: FsrParams) -> float:
    z = np.asarray(z, dtype=float)
    r = np.asarray(observed, dtype=float) - operator.forward_real(z)
    return float(
        0.5 * np.dot(r, r)
        + params.gamma1 * np.abs(circular_difference(z)).sum()
        + params.gamma2 * np.abs(z).sum()
    )


@dataclass
class AdmmState:
    """ADMM iterate. ``u = [u1; u2]`` and ``y = [y1; y2]`` follow ``Phi = [D; I]``."""

    z: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    iteration: int = 0
    objective: collections.deque = field(default_factory=lambda: collections.deque(maxlen=1000))
    primal_residual: collections.deque = field(
        default_factory=lambda: collections.deque(maxlen=1000)
    )
    dual_residual: collections.deque = field(
        default_factory=lambda: collections.deque(maxlen=1000)
    )

    @classmethod
    def initial(cls, z0, history: int = 1000) -> "AdmmState":
        """State with ``u = Phi z0`` and zero duals."""
        z0 = np.asarray(z0, dtype=float).copy()
        n = z0.size
        return cls(
            z=z0,
            u1=circular_difference(z0),
            u2=z0.copy(),
            y1=np.zeros(n),
            y2=np.zeros(n),
            objective=collections.deque(maxlen=history),
            primal_residual=collections.deque(maxlen=history),
            dual_residual=collections.deque(maxlen=history),
        )


def admm_rhs(state: AdmmState, backprojection, rho: float) -> np.ndarray:
    """Right-hand side of the z-update; ``backprojection = V^R^T b``."""
    return (
        rho * circular_difference_adjoint(state.u1 - state.y1)
        + rho * (state.u2 - state.y2)
        + backprojection
    )


def admm_step(
    state: AdmmState,
    observed,
    operator: PartialDftOperator,
    system: DiagonalizedSystem,
    params: FsrParams,
    backprojection=None,
) -> AdmmState:
    """One ADMM iteration; returns a new state and leaves ``state`` untouched.

    ``backprojection`` may carry a precomputed ``V^R^T observed``.
    """
    rho = params.rho
    for arr in (state.z, state.u1, state.u2, state.y1, state.y2):
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError(f"non-finite ADMM state at iteration {state.iteration}")
    if backprojection is None:
        backprojection = operator.adjoint_stacked(observed)

    z = solve_A(admm_rhs(state, backprojection, rho), system)
    dz = circular_difference(z)
    u1 = soft_threshold(dz + state.y1, params.gamma1 / rho)
    u2 = soft_threshold(z + state.y2, params.gamma2 / rho)
    r1 = dz - u1
    r2 = z - u2
    y1 = state.y1 + r1
    y2 = state.y2 + r2

    for arr in (z, u1, u2, y1, y2):
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError(f"ADMM diverged at iteration {state.iteration + 1}")

    new = AdmmState(
        z, u1, u2, y1, y2, state.iteration + 1,
        state.objective, state.primal_residual, state.dual_residual,
    )
    new.objective.append(fsr_objective(z, observed, operator, params))
    new.primal_residual.append(float(np.sqrt(np.dot(r1, r1) + np.dot(r2, r2))))
    dual = rho * (circular_difference_adjoint(u1 - state.u1) + (u2 - state.u2))
    new.dual_residual.append(float(np.linalg.norm(dual)))
    return new


def round_to_grid(z, lam: float) -> np.ndarray:
    """``ceil(floor(z / lam) / 2) * 2 lam``: nearest multiple of ``2 lam``, ties up."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    z = np.asarray(z, dtype=float)
    return np.ceil(np.floor(z / lam) / 2.0) * (2.0 * lam)


def run_admm(observed, operator, system, params: FsrParams, z0) -> AdmmState:
    state = AdmmState.initial(z0, params.history)
    backprojection = operator.adjoint_stacked(observed)
    stop = None
    if params.tolerance is not None:
        stop = params.tolerance * np.sqrt(operator.n)
    for _ in range(params.max_iters):
        state = admm_step(state, observed, operator, system, params, backprojection)
        if stop is not None and state.primal_residual[-1] < stop and state.dual_residual[-1] < stop:
            break
    return state


def reconstruct_fsr(
    folded: FoldedSamples,
    mask: FrequencyMask,
    params: FsrParams = FsrParams(),
    system: Optional[DiagonalizedSystem] = None,
    rounding: bool = True,
) -> ReconResult:
    """Recover the unfolded signal from folded samples.

    ``system`` may be passed to reuse a factorization across calls with the
    same mask and ``rho``.
    """
    n = folded.n_samples
    if mask.n_samples != n:
        raise ValueError(f"mask is for N={mask.n_samples}, samples have N={n}")
    operator = PartialDftOperator(mask)
    if system is None:
        system = DiagonalizedSystem.build(mask, params.rho)
    elif system.n_samples != n or system.rho != params.rho:
        raise ValueError("diagonalized system does not match samples / rho")

    t0 = time.perf_counter()
    observed = operator.forward_real(folded.samples)
    z0 = np.random.default_rng(params.init_seed).standard_normal(n)
    state = run_admm(observed, operator, system, params, z0)
    z = round_to_grid(state.z, folded.lam) if rounding else state.z.copy()
    f_est = folded.samples - z
    elapsed = time.perf_counter() - t0

    return ReconResult(
        z=z,
        f_est=f_est,
        z_raw=state.z,
        iterations=state.iteration,
        runtime_s=elapsed,
        objective=list(state.objective),
        primal_residual=list(state.primal_residual),
        dual_residual=list(state.dual_residual),
    )


def with_seed(params: FsrParams, seed: int) -> FsrParams:
    return replace(params, init_seed=int(seed))
