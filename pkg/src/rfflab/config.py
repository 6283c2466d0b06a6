"""Experiment configuration: declarative sweep descriptions and JSON I/O.

A config is one JSON document; unknown keys are rejected so typos fail loudly.
Grid defaults mirror the full desk-scale parameter space; smoke runs shrink
the grids and trial counts, not the schema.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ParameterError
from .rff import ScaleMode

DEFAULT_P_GRID = (100, 500, 1000, 2500, 5000, 10000, 15000, 20000)
DEFAULT_T_GRID = (6, 12, 24, 60)
DEFAULT_GAMMA_GRID = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
DEFAULT_K_GRID = (5, 10, 15, 20, 30)


@dataclass(frozen=True)
class ProcessParams:
    """Predictor-process parameters shared by every cell (K comes from the grid)."""

    phi_low: float = 0.82
    phi_high: float = 0.98
    rho: float = 0.1
    burn_in: int = 500


@dataclass(frozen=True)
class ExperimentConfig:
    P_grid: tuple[int, ...] = DEFAULT_P_GRID
    T_grid: tuple[int, ...] = DEFAULT_T_GRID
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID
    K_grid: tuple[int, ...] = DEFAULT_K_GRID
    trials: int = 1000
    mode: ScaleMode = ScaleMode.RMS
    oracle_samples: int | None = None
    root_seed: int = 0
    output_path: str = "results"
    n_query: int = 10
    process: ProcessParams = field(default_factory=ProcessParams)
    # Cell enumeration for sweeps: "base_point" runs one-at-a-time marginals
    # around the base point plus the (P, T) and (P, gamma) cross-sections;
    # "full_grid" runs the cartesian product.
    sweep_scheme: str = "base_point"
    base_P: int = 1000
    base_T: int = 12
    base_gamma: float = 2.0
    base_K: int = 15

    def __post_init__(self):
        for name in ("P_grid", "T_grid", "gamma_grid", "K_grid"):
            grid = tuple(getattr(self, name))
            object.__setattr__(self, name, grid)
            if len(grid) == 0 or any(v <= 0 for v in grid):
                raise ParameterError(f"{name} must be a nonempty list of positive values")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.n_query < 2 or self.n_query % 2:
            raise ParameterError("n_query must be an even count >= 2")
        if self.oracle_samples is not None and self.oracle_samples < 1000:
            raise ParameterError("oracle_samples must be >= 1000 when present")
        if self.sweep_scheme not in ("base_point", "full_grid"):
            raise ParameterError(f"unknown sweep_scheme: {self.sweep_scheme}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        for name in ("P_grid", "T_grid", "gamma_grid", "K_grid"):
            d[name] = list(d[name])
        return d


def _strict_fields(data: dict, allowed: set[str], where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ParameterError(f"unknown {where} key: {sorted(unknown)[0]}")


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ParameterError("config must be a JSON object")
    allowed = {
        "P_grid", "T_grid", "gamma_grid", "K_grid", "trials", "mode",
        "oracle_samples", "root_seed", "output_path", "n_query", "process",
        "sweep_scheme", "base_P", "base_T", "base_gamma", "base_K",
    }
    _strict_fields(data, allowed, "config")
    kwargs = dict(data)
    if "mode" in kwargs:
        try:
            kwargs["mode"] = ScaleMode(str(kwargs["mode"]).lower())
        except ValueError:
            raise ParameterError(f"mode must be 'rms' or 'samplestd', got {kwargs['mode']!r}")
    if "process" in kwargs:
        proc = kwargs["process"]
        if not isinstance(proc, dict):
            raise ParameterError("process must be a JSON object")
        _strict_fields(proc, {"phi_low", "phi_high", "rho", "burn_in"}, "process")
        kwargs["process"] = ProcessParams(**proc)
    for name in ("P_grid", "T_grid", "gamma_grid", "K_grid"):
        if name in kwargs:
            kwargs[name] = tuple(kwargs[name])
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ParameterError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ParameterError(f"config {p} is not valid JSON: {err}") from err
    return config_from_dict(data)


def apply_overrides(config: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    """Apply key=value overrides (JSON-parsed values) on top of a config."""
    updates: dict = {}
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ParameterError(f"override must look like key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw  # bare strings like samplestd are fine unquoted
        updates[key] = value
    merged = config.to_dict()
    for key, value in updates.items():
        if key not in merged:
            raise ParameterError(f"unknown config key: {key}")
        if key == "process":
            raise ParameterError("override process fields via a config file")
        merged[key] = value
    merged["process"] = asdict(config.process)
    return config_from_dict(merged)
