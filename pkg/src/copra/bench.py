"""Monte-Carlo comparison of regularizer selectors.

Three scenarios are built in:

* ``S1``: 100 x 90 complex Gaussian model, real i.i.d. Gaussian signal, SNR sweep.
* ``S2``: 100 x 100 real Gaussian model, independent non-identically
  distributed signal, SNR sweep.
* ``S3``: 100 x 100 complex Gaussian model, Gray 8-QAM symbols, Eb/N0 sweep.

Every trial draws from its own generator, seeded from
``(master_seed, scenario, sweep point, trial index)``, so results do not
depend on execution order or on the number of worker processes.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, CopraError, DomainError, InvalidInputError, NonConvergenceError
from .estimators import (
    Method,
    copra_from_decomposition,
    gcv_select,
    lmmse_estimate,
    ls_estimate,
    quasiopt_select,
    rls_solve,
)
from .qam import BITS_PER_SYMBOL, bit_error_rate, qam8_demod, qam8_mod
from .solver import SolverConfig
from .spectral import decompose

CSV_HEADER = ("scenario", "sweep_db", "method", "mean_nmse_db", "ber", "trials", "fallback_rate")
SCENARIO_IDS = ("S1", "S2", "S3")
ALL_METHODS = tuple(Method)


def _sweep(lo, step, hi):
    return tuple(float(v) for v in np.arange(lo, hi + step / 2, step))


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str
    M: int
    N: int
    field: str
    signal_kind: str
    sweep: tuple
    trials: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if self.scenario_id not in SCENARIO_IDS:
            raise ConfigError(f"unknown scenario {self.scenario_id!r}")
        if self.field not in ("real", "complex"):
            raise ConfigError(f"field must be 'real' or 'complex', got {self.field!r}")
        if self.signal_kind not in ("gaussian_iid", "gaussian_ind", "qam8_gray"):
            raise ConfigError(f"unknown signal kind {self.signal_kind!r}")
        if self.signal_kind == "qam8_gray" and self.field != "complex":
            raise ConfigError("8-QAM symbols need a complex model")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.M < 1 or self.N < 1:
            raise ConfigError("M and N must be positive")
        sweep = tuple(float(v) for v in self.sweep)
        if not sweep or any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise ConfigError("sweep must be nonempty and strictly increasing")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "sweep", sweep)

    @property
    def sweep_axis(self) -> str:
        return "ebno_db" if self.signal_kind == "qam8_gray" else "snr_db"

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)


def scenario(scenario_id: str, **overrides) -> ScenarioConfig:
    """Default configuration for ``S1``, ``S2`` or ``S3`` (case-insensitive)."""
    sid = scenario_id.upper()
    presets = {
        "S1": dict(M=100, N=90, field="complex", signal_kind="gaussian_iid", sweep=_sweep(-10, 5, 30)),
        "S2": dict(M=100, N=100, field="real", signal_kind="gaussian_ind", sweep=_sweep(-10, 5, 30)),
        "S3": dict(M=100, N=100, field="complex", signal_kind="qam8_gray", sweep=_sweep(0, 3, 24)),
    }
    if sid not in presets:
        raise ConfigError(f"unknown scenario {scenario_id!r}; expected one of s1, s2, s3")
    return ScenarioConfig(scenario_id=sid, **{**presets[sid], **overrides})


@dataclass(frozen=True)
class ModelInstance:
    H: np.ndarray
    x_true: np.ndarray
    z: np.ndarray
    y: np.ndarray
    sigma_z_sq: float
    snr_target_db: float
    bits: np.ndarray | None = None


def trial_seed(cfg: ScenarioConfig, sweep_db, trial_index) -> np.random.SeedSequence:
    sweep_bits = struct.unpack("<Q", struct.pack("<d", float(sweep_db)))[0]
    key = (SCENARIO_IDS.index(cfg.scenario_id), sweep_bits, int(trial_index))
    return np.random.SeedSequence(cfg.master_seed, spawn_key=key)


def _gaussian(rng, shape, field):
    if field == "complex":
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return rng.standard_normal(shape)


def generate_instance(cfg: ScenarioConfig, sweep_db, trial_index) -> ModelInstance:
    if not 0 <= trial_index < cfg.trials:
        raise ConfigError(f"trial_index {trial_index} outside [0, {cfg.trials})")
    rng = np.random.default_rng(trial_seed(cfg, sweep_db, trial_index))
    M, N = cfg.M, cfg.N
    H = _gaussian(rng, (M, N), cfg.field)
    bits = None
    if cfg.signal_kind == "gaussian_iid":
        x = rng.standard_normal(N)
    elif cfg.signal_kind == "gaussian_ind":
        # even entries standard normal, odd entries uniform with unit variance
        x = rng.standard_normal(N)
        odd = slice(1, None, 2)
        x[odd] = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=x[odd].shape)
    else:
        bits = rng.integers(0, 2, size=BITS_PER_SYMBOL * N, dtype=np.uint8)
        x = qam8_mod(bits)
    Hx = H @ x
    if cfg.signal_kind == "qam8_gray":
        sigma_z_sq = 1.0 / (BITS_PER_SYMBOL * 10 ** (sweep_db / 10))
    else:
        sigma_z_sq = float(np.vdot(Hx, Hx).real) / (M * 10 ** (sweep_db / 10))
    z = np.sqrt(sigma_z_sq) * _gaussian(rng, M, cfg.field)
    return ModelInstance(H, x, z, Hx + z, float(sigma_z_sq), float(sweep_db), bits)


def nmse(x_true, x_hat) -> float:
    x_true = np.asarray(x_true)
    x_hat = np.asarray(x_hat)
    if x_true.shape != x_hat.shape:
        raise InvalidInputError("x_true and x_hat must have the same shape")
    ref = float(np.vdot(x_true, x_true).real)
    if ref == 0:
        raise DomainError("normalized error is undefined for a zero truth vector")
    err = x_hat - x_true
    return float(np.vdot(err, err).real) / ref


@dataclass(frozen=True)
class MethodOutcome:
    nmse: float
    ber: float | None
    gamma_used: float
    converged: bool = True
    fallback_used: bool = False


@dataclass(frozen=True)
class TrialRecord:
    scenario_id: str
    sweep_point_db: float
    trial_index: int
    outcomes: dict


def run_trial(
    cfg: ScenarioConfig, sweep_db, trial_index, methods=ALL_METHODS, solver_cfg: SolverConfig | None = None
) -> TrialRecord:
    inst = generate_instance(cfg, sweep_db, trial_index)
    dec, data = decompose(inst.H, inst.y)
    outcomes = {}
    for method in map(Method, methods):
        converged, fallback = True, False
        if method is Method.COPRA:
            try:
                est, sel = copra_from_decomposition(dec, data, inst.y, solver_cfg)
                converged, fallback = sel.converged, sel.fallback_used
            except NonConvergenceError as exc:
                est = rls_solve(dec, inst.y, data.N * exc.last_iterate)
                converged = False
            except CopraError:
                est = ls_estimate(dec, inst.y)
                converged, fallback = False, True
        elif method is Method.LS:
            est = ls_estimate(dec, inst.y)
        elif method is Method.LMMSE:
            est = lmmse_estimate(dec, inst.y, inst.sigma_z_sq)
        elif method is Method.GCV:
            est = rls_solve(dec, inst.y, gcv_select(dec, inst.y), Method.GCV)
        else:
            est = rls_solve(dec, inst.y, quasiopt_select(dec, inst.y), Method.QUASIOPT)
        ber = None
        if inst.bits is not None:
            ber = bit_error_rate(inst.bits, qam8_demod(est.x_hat))
        outcomes[method.value] = MethodOutcome(
            nmse(inst.x_true, est.x_hat), ber, est.gamma_used, converged, fallback
        )
    return TrialRecord(cfg.scenario_id, float(sweep_db), int(trial_index), outcomes)


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    sweep_db: float
    method: str
    mean_nmse_db: float
    ber: float | None
    trials: int
    fallback_rate: float

    def csv_fields(self):
        return [
            self.scenario,
            repr(self.sweep_db),
            self.method,
            repr(self.mean_nmse_db),
            "" if self.ber is None else repr(self.ber),
            str(self.trials),
            repr(self.fallback_rate),
        ]


@dataclass
class BenchmarkReport:
    rows: list
    records: list = field(repr=False)
    manifest: dict

    def row(self, sweep_db, method) -> ReportRow:
        method = Method(method).value
        for r in self.rows:
            if r.sweep_db == sweep_db and r.method == method:
                return r
        raise KeyError((sweep_db, method))

    def write_csv(self, path) -> Path:
        path = Path(path)
        try:
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(CSV_HEADER)
                for r in self.rows:
                    writer.writerow(r.csv_fields())
        except OSError as exc:
            raise OSError(f"cannot write results CSV {path}: {exc}") from exc
        return path

    def write_manifest(self, path) -> Path:
        path = Path(path)
        try:
            path.write_text(json.dumps(self.manifest, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write run manifest {path}: {exc}") from exc
        return path


def manifest_path(csv_path) -> Path:
    """``results.csv`` -> ``results.manifest.json``."""
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".manifest.json")


def aggregate(cfg: ScenarioConfig, records, methods) -> list:
    rows = []
    for sweep_db in cfg.sweep:
        cell = [r for r in records if r.sweep_point_db == sweep_db]
        for m in map(Method, methods):
            outs = [r.outcomes[m.value] for r in cell]
            mean = math.fsum(o.nmse for o in outs) / len(outs)
            bers = [o.ber for o in outs if o.ber is not None]
            rows.append(
                ReportRow(
                    scenario=cfg.scenario_id,
                    sweep_db=sweep_db,
                    method=m.value,
                    mean_nmse_db=10 * math.log10(mean) if mean > 0 else -math.inf,
                    ber=math.fsum(bers) / len(bers) if bers else None,
                    trials=len(outs),
                    fallback_rate=sum(o.fallback_used for o in outs) / len(outs),
                )
            )
    return rows


def _run_chunk(args):
    cfg, jobs, methods, solver_cfg = args
    return [run_trial(cfg, s, t, methods, solver_cfg) for s, t in jobs]


def run_benchmark(
    cfg: ScenarioConfig,
    methods=ALL_METHODS,
    *,
    solver_cfg: SolverConfig | None = None,
    out=None,
    workers: int = 1,
) -> BenchmarkReport:
    """Run every trial at every sweep point and aggregate per method.

    When ``out`` is given the CSV is written there and the manifest next to it.
    """
    methods = tuple(Method(m).value for m in methods)
    if not methods:
        raise ConfigError("at least one method is required")
    solver_cfg = solver_cfg or SolverConfig()
    jobs = [(s, t) for s in cfg.sweep for t in range(cfg.trials)]
    if workers > 1:
        size = max(1, len(jobs) // (4 * workers))
        chunks = [(cfg, jobs[i : i + size], methods, solver_cfg) for i in range(0, len(jobs), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [rec for part in pool.map(_run_chunk, chunks) for rec in part]
    else:
        records = _run_chunk((cfg, jobs, methods, solver_cfg))

    manifest = {
        "tool": "copra",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "master_seed": cfg.master_seed,
        "scenario": {**dataclasses.asdict(cfg), "sweep": list(cfg.sweep), "sweep_axis": cfg.sweep_axis},
        "methods": list(methods),
        "solver": dataclasses.asdict(solver_cfg),
    }
    report = BenchmarkReport(aggregate(cfg, records, methods), records, manifest)
    if out is not None:
        report.write_csv(out)
        report.write_manifest(manifest_path(out))
    return report
