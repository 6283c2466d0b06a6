"""Seeded, parallel Monte Carlo sweeps and their persisted result tables.

Every (cell, trial) pair derives its own counter-based stream, so grid cells
and trials can run on any number of workers while reductions stay in fixed
(cell, trial) order; the CSV output of a run is byte-identical across
repeated runs and worker counts.

Within a trial the standard and standardized error records share one feature
bank, one panel, and one set of query pairs (a paired design), so degradation
factors are not inflated by independent sampling noise.

Evaluation pairs per trial: the Q query states following the training window
yield Q/2 disjoint consecutive pairs (queries[2j], queries[2j+1]) plus Q
diagonal self-pairs (q, q). The diagonal is where per-feature rescaling
visibly distorts the kernel scale; without it the standardized and standard
errors are nearly indistinguishable at these bandwidths.
"""

from __future__ import annotations

import csv
import datetime
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import BoundParams, evaluate_bounds
from .config import ExperimentConfig
from .datagen import PredictorProcessSpec, simulate_panel
from .errors import DegenerateOracle, DegenerateScale, ParameterError
from .oracle import DEGENERATE_TOLERANCE, _pair_means
from .rff import SCALE_FLOOR, ScaleMode, feature_map, sample_features, scale_variances
from .stats import ErrorLabel, ErrorSample, degradation_factor, ks_two_sample, mean_abs_error
from .streams import derive_stream

CONVERGENCE_HEADER = ["experiment", "P", "T", "K", "gamma", "mode", "metric", "mean", "stderr", "n"]
SWEEP_HEADER = [
    "P", "T", "K", "gamma", "mode",
    "mae_standard", "mae_standardized", "degradation", "ks_stat", "ks_pvalue", "trials",
]
CALIBRATION_HEADER = [
    "scenario", "P", "B2", "sigma2", "Cz", "cz", "T_operational",
    "t_crit_months", "exp_bound", "poly_bound", "binding_term", "regime",
]


@dataclass(frozen=True)
class Cell:
    P: int
    T: int
    gamma: float
    K: int


@dataclass(frozen=True)
class TrialResult:
    """Per-trial error records at one grid cell."""

    cell: Cell
    trial_index: int
    standard_errors: np.ndarray      # per query pair, absolute error vs Gaussian
    standardized_errors: np.ndarray  # same pairs, standardized kernel
    oracle_errors: np.ndarray | None  # standardized kernel vs limit-kernel oracle
    degenerate_count: int            # degenerate oracle draws in this trial


def evaluation_pairs(n_query: int) -> tuple[tuple[int, int], ...]:
    """Index pairs evaluated per trial: disjoint consecutive pairs, then diagonals."""
    if n_query < 2 or n_query % 2:
        raise ParameterError("n_query must be an even count >= 2")
    disjoint = tuple((2 * j, 2 * j + 1) for j in range(n_query // 2))
    diagonal = tuple((i, i) for i in range(n_query))
    return disjoint + diagonal


def _run_trial(payload: tuple) -> tuple[int, int, np.ndarray, np.ndarray, np.ndarray | None, int]:
    """Execute one trial; payload is primitives so it crosses process pools."""
    (root_seed, experiment_id, cell_index, trial_index, P, T, gamma, K,
     mode_value, n_query, phi_low, phi_high, rho, burn_in, oracle_samples) = payload
    mode = ScaleMode(mode_value)
    rng = derive_stream(root_seed, experiment_id, cell_index, trial_index)
    spec = PredictorProcessSpec(dim=K, phi_low=phi_low, phi_high=phi_high, rho=rho, burn_in=burn_in)
    panel = simulate_panel(spec, T, n_query, rng)
    bank = sample_features(K, P, gamma, rng)
    Z_train = feature_map(bank, panel.train)
    Z_query = feature_map(bank, panel.queries)
    variances = scale_variances(Z_train, mode)
    low = np.flatnonzero(np.sqrt(variances) < SCALE_FLOOR)
    if low.size:
        raise DegenerateScale(low, SCALE_FLOOR)

    pairs = evaluation_pairs(n_query)
    n_pairs = len(pairs)
    err_standard = np.empty(n_pairs)
    err_standardized = np.empty(n_pairs)
    k_standardized = np.empty(n_pairs)
    for idx, (i, j) in enumerate(pairs):
        d2 = float(np.sum((panel.queries[i] - panel.queries[j]) ** 2))
        k_gauss = np.exp(-0.5 * gamma * gamma * d2)
        k_emp = float(Z_query[i] @ Z_query[j]) / P
        k_std = float(np.sum(Z_query[i] * Z_query[j] / variances)) / P
        k_standardized[idx] = k_std
        err_standard[idx] = abs(k_emp - k_gauss)
        err_standardized[idx] = abs(k_std - k_gauss)

    err_oracle = None
    degenerate = 0
    if oracle_samples:
        oracle_rng = derive_stream(root_seed, experiment_id + "/oracle", cell_index, trial_index)
        means, _, _, degenerate = _pair_means(
            panel.queries, list(pairs), panel.train, gamma, oracle_samples, mode, oracle_rng
        )
        if degenerate > DEGENERATE_TOLERANCE * oracle_samples:
            raise DegenerateOracle(
                f"{degenerate} of {oracle_samples} oracle draws degenerate at "
                f"cell {cell_index} trial {trial_index}"
            )
        err_oracle = np.abs(k_standardized - means)
    return cell_index, trial_index, err_standard, err_standardized, err_oracle, degenerate


def convergence_cells(config: ExperimentConfig) -> list[Cell]:
    """Cartesian product of the grids, the feature count varying fastest."""
    return [
        Cell(P=P, T=T, gamma=g, K=K)
        for T in config.T_grid
        for K in config.K_grid
        for g in config.gamma_grid
        for P in config.P_grid
    ]


def sweep_cells(config: ExperimentConfig) -> list[Cell]:
    """Cells of a sweep run.

    base_point: one-at-a-time marginals around the base point followed by the
    (P, T) and (P, gamma) cross-sections, deduplicated in first-seen order.
    full_grid: the full cartesian product.
    """
    if config.sweep_scheme == "full_grid":
        return convergence_cells(config)
    base = Cell(P=config.base_P, T=config.base_T, gamma=config.base_gamma, K=config.base_K)
    ordered: list[Cell] = []
    seen: set[Cell] = set()

    def add(cell: Cell) -> None:
        if cell not in seen:
            seen.add(cell)
            ordered.append(cell)

    for P in config.P_grid:
        add(Cell(P=P, T=base.T, gamma=base.gamma, K=base.K))
    for T in config.T_grid:
        add(Cell(P=base.P, T=T, gamma=base.gamma, K=base.K))
    for g in config.gamma_grid:
        add(Cell(P=base.P, T=base.T, gamma=g, K=base.K))
    for K in config.K_grid:
        add(Cell(P=base.P, T=base.T, gamma=base.gamma, K=K))
    for P in config.P_grid:
        for T in config.T_grid:
            add(Cell(P=P, T=T, gamma=base.gamma, K=base.K))
    for P in config.P_grid:
        for g in config.gamma_grid:
            add(Cell(P=P, T=base.T, gamma=g, K=base.K))
    return ordered


def _collect_cell(
    config: ExperimentConfig,
    experiment_id: str,
    cell_index: int,
    cell: Cell,
    pool: ProcessPoolExecutor | None,
    workers: int,
) -> list[TrialResult]:
    payloads = [
        (
            config.root_seed, experiment_id, cell_index, trial, cell.P, cell.T,
            cell.gamma, cell.K, config.mode.value, config.n_query,
            config.process.phi_low, config.process.phi_high,
            config.process.rho, config.process.burn_in, config.oracle_samples,
        )
        for trial in range(config.trials)
    ]
    if pool is None:
        raw = [_run_trial(p) for p in payloads]
    else:
        chunk = max(1, config.trials // (4 * workers))
        raw = list(pool.map(_run_trial, payloads, chunksize=chunk))
    # pool.map preserves submission order, so the reduction order is fixed
    return [
        TrialResult(
            cell=cell, trial_index=t, standard_errors=es, standardized_errors=ss,
            oracle_errors=orc, degenerate_count=deg,
        )
        for (_, t, es, ss, orc, deg) in raw
    ]


def _pooled(results: list[TrialResult], attr: str) -> np.ndarray:
    return np.concatenate([getattr(r, attr) for r in results])


def _mean_stderr(values: np.ndarray) -> tuple[float, float, int]:
    n = values.size
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return mean, stderr, n


def run_convergence(
    config: ExperimentConfig,
    workers: int = 1,
    progress=None,
    write: bool = True,
) -> list[dict]:
    """Kernel-error means per grid cell for both kernels (plus the oracle).

    Produces one row per (cell, metric): the mean absolute error of the
    standard kernel against the Gaussian target, of the standardized kernel
    against the same target, and, when oracle_samples is set, of the
    standardized kernel against its own limit-kernel oracle.
    """
    cells = convergence_cells(config)
    rows: list[dict] = []
    started = time.time()
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for ci, cell in enumerate(cells):
            results = _collect_cell(config, "convergence", ci, cell, pool, workers)
            metrics = [
                ("mae_standard_vs_gauss", _pooled(results, "standard_errors")),
                ("mae_std_vs_gauss", _pooled(results, "standardized_errors")),
            ]
            if config.oracle_samples:
                metrics.append(("mae_std_vs_oracle", _pooled(results, "oracle_errors")))
            for metric, values in metrics:
                mean, stderr, n = _mean_stderr(values)
                rows.append({
                    "experiment": "convergence", "P": cell.P, "T": cell.T, "K": cell.K,
                    "gamma": cell.gamma, "mode": config.mode.value, "metric": metric,
                    "mean": mean, "stderr": stderr, "n": n,
                })
            if progress:
                head = rows[-len(metrics)]
                progress(
                    f"[convergence] cell {ci + 1}/{len(cells)} "
                    f"P={cell.P} T={cell.T} K={cell.K} gamma={cell.gamma} "
                    f"mae_standard={head['mean']:.5f}"
                )
    finally:
        if pool is not None:
            pool.shutdown()
    if write:
        _persist(config, "convergence", CONVERGENCE_HEADER, rows, workers, time.time() - started)
    return rows


def run_sweep(
    config: ExperimentConfig,
    workers: int = 1,
    progress=None,
    write: bool = True,
) -> list[dict]:
    """Degradation factors and KS separation for every sweep cell."""
    cells = sweep_cells(config)
    rows: list[dict] = []
    started = time.time()
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for ci, cell in enumerate(cells):
            results = _collect_cell(config, "sweep", ci, cell, pool, workers)
            key = f"P={cell.P},T={cell.T},gamma={cell.gamma},K={cell.K}"
            standard = ErrorSample(_pooled(results, "standard_errors"), ErrorLabel.STANDARD, key)
            standardized = ErrorSample(
                _pooled(results, "standardized_errors"), ErrorLabel.STANDARDIZED, key
            )
            ks = ks_two_sample(standard.values, standardized.values)
            row = {
                "P": cell.P, "T": cell.T, "K": cell.K, "gamma": cell.gamma,
                "mode": config.mode.value,
                "mae_standard": mean_abs_error(standard),
                "mae_standardized": mean_abs_error(standardized),
                "degradation": degradation_factor(standardized, standard),
                "ks_stat": ks.statistic, "ks_pvalue": ks.p_value,
                "trials": config.trials,
            }
            rows.append(row)
            if progress:
                progress(
                    f"[sweep] cell {ci + 1}/{len(cells)} "
                    f"P={cell.P} T={cell.T} K={cell.K} gamma={cell.gamma} "
                    f"degradation={row['degradation']:.2f} ks={row['ks_stat']:.3f}"
                )
    finally:
        if pool is not None:
            pool.shutdown()
    if write:
        _persist(config, "sweep", SWEEP_HEADER, rows, workers, time.time() - started)
    return rows


@dataclass(frozen=True)
class CalibrationScenario:
    name: str
    params: BoundParams
    T_operational: float


def preset_scenarios(name: str) -> list[CalibrationScenario]:
    """Built-in calibration presets.

    baseline reproduces the benchmark arithmetic (375/276/108 months);
    signal varies the signal power over four R-squared levels at fixed noise;
    noise varies the noise variance at the benchmark signal. Every preset
    evaluates P in {15, 1000, 12000} at an operational window of 12 months.
    """
    P_levels = (15, 1000, 12000)
    T_op = 12.0

    def rows(tag: str, B2: float, sigma2: float, c_z: float, C_z: float):
        return [
            CalibrationScenario(
                name=tag,
                params=BoundParams(B2=B2, sigma2=sigma2, T=T_op, P=P, c_z=c_z, C_z=C_z),
                T_operational=T_op,
            )
            for P in P_levels
        ]

    presets: dict[str, list[CalibrationScenario]] = {
        "baseline": rows("baseline", 5e-5, 2.2e-3, 1.0, 1.1),
        "signal": (
            rows("signal_R2_5.0pct", 1e-4, 2e-3, 1.0, 1.0)
            + rows("signal_R2_2.3pct", 5e-5, 2e-3, 1.0, 1.0)
            + rows("signal_R2_1.0pct", 2.2e-5, 2e-3, 1.0, 1.0)
            + rows("signal_R2_0.45pct", 1e-5, 2e-3, 1.0, 1.0)
        ),
        "noise": (
            rows("noise_sigma2_1.5e-3", 5e-5, 1.5e-3, 1.0, 1.0)
            + rows("noise_sigma2_2.0e-3", 5e-5, 2.0e-3, 1.0, 1.0)
            + rows("noise_sigma2_2.5e-3", 5e-5, 2.5e-3, 1.0, 1.0)
            + rows("noise_sigma2_3.0e-3", 5e-5, 3.0e-3, 1.0, 1.0)
        ),
    }
    presets["all"] = presets["baseline"] + presets["signal"] + presets["noise"]
    if name not in presets:
        raise ParameterError(f"unknown preset: {name} (choose from {sorted(presets)})")
    return presets[name]


def load_scenarios(path: str | Path) -> list[CalibrationScenario]:
    """Read calibration scenarios from a JSON list of objects."""
    p = Path(path)
    if not p.exists():
        raise ParameterError(f"scenario file not found: {p}")
    data = json.loads(p.read_text())
    if not isinstance(data, list) or not data:
        raise ParameterError("scenario file must hold a nonempty JSON list")
    allowed = {"name", "B2", "sigma2", "cz", "Cz", "P", "T_operational", "c_universal"}
    out = []
    for i, entry in enumerate(data):
        unknown = set(entry) - allowed
        if unknown:
            raise ParameterError(f"unknown scenario key: {sorted(unknown)[0]}")
        missing = {"name", "B2", "sigma2", "P", "T_operational"} - set(entry)
        if missing:
            raise ParameterError(f"scenario {i} missing key: {sorted(missing)[0]}")
        params = BoundParams(
            B2=float(entry["B2"]), sigma2=float(entry["sigma2"]),
            T=float(entry["T_operational"]), P=int(entry["P"]),
            c_z=float(entry.get("cz", 1.0)), C_z=float(entry.get("Cz", 1.0)),
            c_universal=float(entry.get("c_universal", 1.0)),
        )
        out.append(CalibrationScenario(str(entry["name"]), params, float(entry["T_operational"])))
    return out


def run_calibration(
    scenarios: list[CalibrationScenario],
    output_path: str | Path | None = None,
    progress=None,
) -> list[dict]:
    """Evaluate bounds, critical sample size, and regime for each scenario."""
    if not scenarios:
        raise ParameterError("scenarios must be nonempty")
    rows = []
    started = time.time()
    for sc in scenarios:
        report = evaluate_bounds(sc.params, sc.T_operational)
        rows.append({
            "scenario": sc.name, "P": sc.params.P, "B2": sc.params.B2,
            "sigma2": sc.params.sigma2, "Cz": sc.params.C_z, "cz": sc.params.c_z,
            "T_operational": sc.T_operational,
            "t_crit_months": report.t_crit_months,
            "exp_bound": report.exp_bound, "poly_bound": report.poly_bound,
            "binding_term": report.poly_binding_term.value,
            "regime": report.regime.value,
        })
        if progress:
            progress(
                f"[calibrate] {sc.name} P={sc.params.P} "
                f"t_crit={report.t_crit_months:.1f} regime={report.regime.value}"
            )
    if output_path is not None:
        out = Path(output_path)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "calibration.csv", CALIBRATION_HEADER, rows)
        _write_manifest(
            out / "calibration_manifest.json", "calibration",
            {"scenarios": [sc.name for sc in scenarios]}, 1, time.time() - started,
        )
    return rows


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)  # shortest round-trip form, stable across runs
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(row[col]) for col in header])


def _write_manifest(path: Path, experiment: str, config_dict: dict, workers: int, elapsed: float) -> None:
    from . import __version__

    manifest = {
        "experiment": experiment,
        "config": config_dict,
        "workers": workers,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "rng": "philox4x64 keyed by sha256(root_seed:experiment:cell:trial)",
        "pair_rule": "queries[2j]-queries[2j+1] disjoint pairs plus (q, q) diagonal self-pairs",
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "elapsed_seconds": elapsed,
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _persist(
    config: ExperimentConfig, experiment: str, header: list[str], rows: list[dict],
    workers: int, elapsed: float,
) -> None:
    out = Path(config.output_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / f"{experiment}.csv", header, rows)
        _write_manifest(out / f"{experiment}_manifest.json", experiment, config.to_dict(), workers, elapsed)
    except OSError as err:
        raise OSError(f"failed to persist {experiment} results under {out}: {err}") from err
