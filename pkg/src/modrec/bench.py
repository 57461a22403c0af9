"""Seeded Monte-Carlo sweeps, summaries, CSV and SVG output.

Seeding: trial ``t`` uses the integer seed ``base_seed + t`` for the test
signal at every sweep point (common random numbers across the sweep), and
derives its noise and FSR-initialization streams from
``SeedSequence(base_seed + t)``. Records are therefore independent of
execution order and thread count.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .fastinv import DiagonalizedSystem
from .fsr import FsrParams, reconstruct_fsr
from .lasso import IstaParams, reconstruct_lasso_b2r2
from .signal import (
    FoldedSamples,
    add_awgn,
    generate_test_signal,
    modulo_fold,
    nmse,
    signal_power,
)
from .spectral import out_of_band_indices

METHODS = ("fsr", "lasso_b2r2")
RAW_HEADER = [
    "method", "of", "snr_db", "trial", "seed", "nmse", "nmse_db",
    "runtime_ms", "iterations", "exact",
]
SUMMARY_HEADER = [
    "method", "sweep_var", "sweep_value", "mean_nmse", "median_nmse",
    "std_nmse", "mean_nmse_db", "exact_rate", "mean_runtime_ms",
]
DEFAULT_SNR_GRID = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0]
DEFAULT_OF_GRID = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def parse_snr(value) -> float:
    """Accept numbers, ``"inf"`` or ``None`` (noiseless)."""
    if value is None:
        return math.inf
    if isinstance(value, str):
        return float(value.strip().lower().replace("db", ""))
    return float(value)


@dataclass(frozen=True)
class Sweep:
    """``var`` is swept over ``values`` while the other variable stays at ``fixed``."""

    var: str = "snr"
    values: tuple = tuple(DEFAULT_SNR_GRID)
    fixed: float = 6.0

    def __post_init__(self):
        if self.var not in ("snr", "of"):
            raise ConfigError(f"sweep var must be 'snr' or 'of', got {self.var!r}")
        if not self.values:
            raise ConfigError("sweep values must be non-empty")
        object.__setattr__(self, "values", tuple(parse_snr(v) for v in self.values))
        object.__setattr__(self, "fixed", parse_snr(self.fixed))

    def points(self):
        """Yield ``(of, snr_db)`` for every sweep value."""
        for v in self.values:
            yield (self.fixed, v) if self.var == "snr" else (v, self.fixed)


@dataclass(frozen=True)
class ExperimentConfig:
    n_samples: int = 1024
    sample_period: float = 0.01
    lam: float = 0.25
    num_tones: int = 5
    trials: int = 25
    base_seed: int = 0
    sweep: Sweep = Sweep()
    methods: tuple = METHODS
    fsr_params: FsrParams = FsrParams()
    ista_params: IstaParams = IstaParams()
    on_grid: bool = True
    noise_position: str = "post_fold"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.lam <= 0:
            raise ConfigError("lambda must be positive")
        if self.num_tones < 1:
            raise ConfigError("num_tones must be at least 1")
        if self.noise_position not in ("post_fold", "pre_fold"):
            raise ConfigError(f"noise_position must be post_fold or pre_fold, got {self.noise_position!r}")
        methods = tuple(self.methods)
        if not methods or any(m not in METHODS for m in methods):
            raise ConfigError(f"methods must be a non-empty subset of {METHODS}, got {methods}")
        object.__setattr__(self, "methods", methods)
        for of, _ in self.sweep.points():
            try:
                out_of_band_indices(self.n_samples, of)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    _JSON_KEYS = {
        "n_samples", "sample_period", "lambda", "num_tones", "trials", "base_seed",
        "sweep", "methods", "fsr_params", "ista_params", "on_grid", "noise_position",
    }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        """Strict parse; unknown keys anywhere raise :class:`ConfigError`."""
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - cls._JSON_KEYS
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kw = {k: v for k, v in data.items() if k not in ("lambda", "sweep", "fsr_params", "ista_params")}
        if "lambda" in data:
            kw["lam"] = data["lambda"]
        try:
            if "sweep" in data:
                kw["sweep"] = Sweep(**_strict(data["sweep"], Sweep, "sweep"))
            if "fsr_params" in data:
                kw["fsr_params"] = FsrParams(**_strict(data["fsr_params"], FsrParams, "fsr_params"))
            if "ista_params" in data:
                kw["ista_params"] = IstaParams(**_strict(data["ista_params"], IstaParams, "ista_params"))
            if "methods" in kw:
                kw["methods"] = tuple(kw["methods"])
            return cls(**kw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "sample_period": self.sample_period,
            "lambda": self.lam,
            "num_tones": self.num_tones,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "sweep": {"var": self.sweep.var, "values": list(self.sweep.values), "fixed": self.sweep.fixed},
            "methods": list(self.methods),
            "fsr_params": dataclasses.asdict(self.fsr_params),
            "ista_params": dataclasses.asdict(self.ista_params),
            "on_grid": self.on_grid,
            "noise_position": self.noise_position,
        }


def _strict(block, klass, name):
    if not isinstance(block, dict):
        raise ConfigError(f"{name} must be an object")
    allowed = {f.name for f in dataclasses.fields(klass)}
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown {name} fields: {sorted(unknown)}")
    return block


@dataclass(frozen=True)
class TrialRecord:
    method: str
    of: float
    snr_db: float
    trial_index: int
    seed: int
    nmse: float
    nmse_db: float
    runtime_ms: float
    iterations_run: int
    exact_recovery: bool


@dataclass(frozen=True)
class TrialInstance:
    """A generated, folded and possibly noisy instance plus its ground truth."""

    original: np.ndarray
    folded: FoldedSamples
    true_residual: np.ndarray
    seed: int
    init_seed: int


def trial_seeds(base_seed: int, trial_index: int):
    """``(signal_seed, noise_seed, init_seed)`` for one trial."""
    seed = int(base_seed) + int(trial_index)
    noise_seed, init_seed = np.random.SeedSequence(seed).generate_state(2)
    return seed, int(noise_seed), int(init_seed)


def make_instance(config: ExperimentConfig, of: float, snr_db: float, trial_index: int) -> TrialInstance:
    seed, noise_seed, init_seed = trial_seeds(config.base_seed, trial_index)
    sig = generate_test_signal(
        seed, config.n_samples, of, config.num_tones, config.on_grid, config.sample_period
    )
    f = sig.samples
    noisy = not math.isinf(snr_db)
    power = signal_power(f)
    if config.noise_position == "post_fold":
        clean = modulo_fold(f, config.lam).samples
        observed = add_awgn(clean, snr_db, power, noise_seed)
        true_z = clean - f
    else:
        perturbed = add_awgn(f, snr_db, power, noise_seed)
        observed = modulo_fold(perturbed, config.lam).samples
        true_z = observed - perturbed
    return TrialInstance(f, FoldedSamples(observed, config.lam, noisy), true_z, seed, init_seed)


class _Cache:
    """Per-OF masks and diagonalized systems, built once and shared read-only."""

    def __init__(self, config):
        self.config = config
        self.masks = {}
        self.systems = {}

    def prepare(self, ofs):
        for of in ofs:
            if of not in self.masks:
                mask = out_of_band_indices(self.config.n_samples, of)
                self.masks[of] = mask
                self.systems[of] = DiagonalizedSystem.build(mask, self.config.fsr_params.rho)


def _run_unit(config, cache, of, snr_db, trial_index):
    inst = make_instance(config, of, snr_db, trial_index)
    mask = cache.masks[of]
    out = []
    for method in config.methods:
        if method == "fsr":
            params = dataclasses.replace(config.fsr_params, init_seed=inst.init_seed)
            t0 = time.perf_counter()
            res = reconstruct_fsr(inst.folded, mask, params, system=cache.systems[of])
        else:
            t0 = time.perf_counter()
            res = reconstruct_lasso_b2r2(inst.folded, mask, config.ista_params)
        runtime_ms = (time.perf_counter() - t0) * 1e3
        err = nmse(inst.original, res.f_est)
        with np.errstate(divide="ignore"):
            err_db = float(10 * np.log10(err))
        out.append(
            TrialRecord(
                method=method,
                of=float(of),
                snr_db=float(snr_db),
                trial_index=trial_index,
                seed=inst.seed,
                nmse=err,
                nmse_db=err_db,
                runtime_ms=runtime_ms,
                iterations_run=res.iterations,
                exact_recovery=bool(np.allclose(res.z, inst.true_residual, rtol=0, atol=1e-9)),
            )
        )
    return out


def worker_count(default: Optional[int] = None) -> int:
    env = os.environ.get("MODREC_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"MODREC_THREADS must be an integer, got {env!r}") from None
        if n > 0:
            return n
    return default or (os.cpu_count() or 1)


def run_sweep(config: ExperimentConfig, workers: Optional[int] = None, progress=None) -> list:
    """Run every (sweep point, trial) and return records ordered by point, trial, method."""
    points = list(config.sweep.points())
    cache = _Cache(config)
    cache.prepare(sorted({of for of, _ in points}))
    units = [(p, t) for p in range(len(points)) for t in range(config.trials)]

    def job(unit):
        p, t = unit
        of, snr = points[p]
        recs = _run_unit(config, cache, of, snr, t)
        if progress is not None:
            progress(unit)
        return recs

    n_workers = workers if workers is not None else worker_count()
    if n_workers <= 1:
        results = [job(u) for u in units]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(job, units))
    return [rec for recs in results for rec in recs]


def infer_sweep_var(records) -> str:
    ofs = {r.of for r in records}
    return "of" if len(ofs) > 1 else "snr"


def summarize(records, sweep_var: Optional[str] = None) -> list:
    """Per (method, sweep value) statistics.

    ``mean_nmse_db`` is the dB value of the mean linear NMSE, which is the
    quantity plotted.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot summarize an empty record list")
    var = sweep_var or infer_sweep_var(records)
    groups: dict = {}
    for r in records:
        key = (r.method, r.snr_db if var == "snr" else r.of)
        groups.setdefault(key, []).append(r)
    rows = []
    for (method, value), recs in groups.items():
        errs = np.array([r.nmse for r in recs])
        mean = float(errs.mean())
        with np.errstate(divide="ignore"):
            mean_db = float(10 * np.log10(mean))
        rows.append({
            "method": method,
            "sweep_var": var,
            "sweep_value": float(value),
            "mean_nmse": mean,
            "median_nmse": float(np.median(errs)),
            "std_nmse": float(errs.std()),
            "mean_nmse_db": mean_db,
            "exact_rate": float(np.mean([r.exact_recovery for r in recs])),
            "mean_runtime_ms": float(np.mean([r.runtime_ms for r in recs])),
        })
    return rows


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def record_row(r: TrialRecord) -> list:
    return [
        r.method, r.of, r.snr_db, r.trial_index, r.seed, r.nmse, r.nmse_db,
        r.runtime_ms, r.iterations_run, r.exact_recovery,
    ]


def emit_csv(rows, path, kind: Optional[str] = None) -> Path:
    """Write raw trial records or summary rows.

    ``kind`` is ``"raw"`` or ``"summary"``; inferred from the row type when
    omitted (an empty list defaults to raw).
    """
    rows = list(rows)
    path = Path(path)
    if kind is None:
        kind = "summary" if rows and isinstance(rows[0], dict) else "raw"
    if kind not in ("raw", "summary"):
        raise ValueError(f"unknown CSV kind {kind!r}")
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if kind == "raw":
                w.writerow(RAW_HEADER)
                for r in rows:
                    w.writerow([_fmt(v) for v in record_row(r)])
            else:
                w.writerow(SUMMARY_HEADER)
                for row in rows:
                    w.writerow([_fmt(row[h]) for h in SUMMARY_HEADER])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_raw_csv(path) -> list:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RAW_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for row in reader:
            if not row:
                continue
            m, of, snr, trial, seed, e, edb, rt, it, ex = row
            out.append(TrialRecord(m, float(of), float(snr), int(trial), int(seed),
                                   float(e), float(edb), float(rt), int(it), ex == "1"))
    return out


def emit_plot(summary, path, floor_db: float = -100.0, width: int = 640, height: int = 420) -> Path:
    """Static SVG line chart of mean NMSE (dB) against the sweep variable.

    Values below ``floor_db`` (including exact recoveries at -inf dB) are
    drawn at the floor. Methods with a single point get markers only.
    """
    summary = list(summary)
    if not summary:
        raise ValueError("empty summary")
    var = summary[0]["sweep_var"]
    if any(row["sweep_var"] != var for row in summary):
        raise ValueError("summary mixes sweep variables")

    series: dict = {}
    for row in summary:
        series.setdefault(row["method"], []).append(
            (row["sweep_value"], max(row["mean_nmse_db"], floor_db))
        )
    for pts in series.values():
        pts.sort()

    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    y_lo = 10 * math.floor(min(ys) / 10)
    y_hi = 10 * math.ceil(max(ys) / 10)
    if y_hi == y_lo:
        y_hi = y_lo + 10

    left, right, top, bottom = 70, 150, 30, 60
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return top + (y_hi - y) / (y_hi - y_lo) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    xlabel = "SNR [dB]" if var == "snr" else "Oversampling factor"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for xv in sorted(set(xs)):
        parts.append(f'<line x1="{sx(xv):.2f}" y1="{top + ph}" x2="{sx(xv):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{sx(xv):.2f}" y="{top + ph + 18}" text-anchor="middle">{xv:g}</text>')
    step = max(10, 10 * math.ceil((y_hi - y_lo) / 80))
    yv = y_lo
    while yv <= y_hi:
        parts.append(f'<line x1="{left - 5}" y1="{sy(yv):.2f}" x2="{left}" y2="{sy(yv):.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{sy(yv) + 4:.2f}" text-anchor="end">{yv:g}</text>')
        yv += step
    parts.append(f'<text x="{left + pw / 2}" y="{height - 15}" text-anchor="middle">{xlabel}</text>')
    parts.append(
        f'<text x="18" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2})">Mean NMSE [dB]</text>'
    )

    for i, (method, pts) in enumerate(series.items()):
        color = colors[i % len(colors)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        if len(pts) > 1:
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        ly = top + 15 + 20 * i
        lx = left + pw + 15
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly + 4}">{method}</text>')
    parts.append("</svg>")

    path = Path(path)
    try:
        path.write_text("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
