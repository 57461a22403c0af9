"""Modulo-sampling signal recovery.

Simulates folding of bandlimited signals into ``[-lam, lam)`` and recovers
the unfolded signal with either a difference-domain LASSO baseline (ISTA +
cumulative sum) or fused sparse reconstruction (FSR) solved by ADMM.
"""

from .signal import (
    BandlimitedSignal,
    FoldedSamples,
    add_awgn,
    clip,
    generate_test_signal,
    modulo_fold,
    nmse,
    nmse_db,
    residual,
)
from .spectral import (
    FrequencyMask,
    PartialDftOperator,
    apply_V,
    apply_V_adjoint_real,
    folded_spectrum,
    out_of_band_indices,
    real_stack,
)
from .fastinv import DiagonalizedSystem, eigenvalues_DtD, mask_spectrum, solve_A
from .lasso import IstaParams, cumulative_sum, first_difference, ista_solve, reconstruct_lasso_b2r2
from .fsr import (
    AdmmState,
    FsrParams,
    admm_step,
    circular_difference,
    circular_difference_adjoint,
    fsr_objective,
    reconstruct_fsr,
    round_to_grid,
    soft_threshold,
)
from .result import ReconResult

__version__ = "0.1.0"
