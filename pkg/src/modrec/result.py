from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ReconResult:
    """Output of a reconstruction run.

    ``z`` is the residual actually subtracted (after grid rounding when
    enabled); ``z_raw`` is the solver output before rounding.
    """

    z: np.ndarray
    f_est: np.ndarray
    z_raw: np.ndarray
    iterations: int
    runtime_s: float
    objective: list = field(default_factory=list)
    primal_residual: list = field(default_factory=list)
    dual_residual: list = field(default_factory=list)
