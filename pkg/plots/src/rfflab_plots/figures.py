"""Build the seven laboratory figures from the pinned result CSV schemas.

Inputs are the convergence, sweep, and calibration CSVs written by the
experiment harness; nothing else is consumed. Rendering is read-only over the
inputs and overwrites its output idempotently. Log-log axes are used for the
convergence figures, which also carry an inverse-square-root reference line;
heatmap color scales clip at a high percentile so a single extreme cell does
not wash out the rest.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """An input CSV does not match the pinned schema; the message names why."""


FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")

_REQUIRED_COLUMNS = {
    "fig1": {"P", "metric", "mean"},
    "fig2": {"P", "T", "K", "gamma", "degradation"},
    "fig3": {"P", "T", "K", "gamma", "degradation"},
    "fig4": {"P", "T", "K", "gamma", "ks_stat"},
    "fig5": {"P", "metric", "mean"},
    "fig6": {"scenario", "P", "t_crit_months", "T_operational"},
    "fig7": {"scenario", "P", "t_crit_months", "T_operational"},
}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: a figure id, its input CSVs, and the output image path."""

    figure: str
    inputs: tuple[Path, ...]
    output: Path
    log_axes: bool = True
    reference_slope: bool = True
    clip_percentile: float = 99.0

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise SchemaError(f"unknown figure id: {self.figure}")
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "output", Path(self.output))


def _typed(value: str):
    try:
        number = float(value)
    except ValueError:
        return value
    return int(number) if number.is_integer() and "." not in value and "e" not in value.lower() else number


def read_rows(paths, required: set[str]) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        path = Path(path)
        if not path.exists():
            raise SchemaError(f"input CSV not found: {path}")
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path} is empty")
            missing = sorted(required - set(reader.fieldnames))
            if missing:
                raise SchemaError(f"{path} is missing column: {missing[0]}")
            for raw in reader:
                rows.append({k: _typed(v) for k, v in raw.items()})
    if not rows:
        raise SchemaError("input CSV has no data rows")
    return rows


def _series_by_metric(rows: list[dict], metric: str) -> tuple[np.ndarray, np.ndarray]:
    pairs = sorted((r["P"], r["mean"]) for r in rows if r["metric"] == metric)
    if not pairs:
        raise SchemaError(f"no rows with metric {metric}")
    P, mean = zip(*pairs)
    return np.asarray(P, float), np.asarray(mean, float)


def _reference_line(ax, P: np.ndarray, anchor: float) -> None:
    guide = anchor * np.sqrt(P[0] / P)
    ax.plot(P, guide, linestyle="--", color="gray", label="$P^{-1/2}$ reference")


def build_fig1(rows: list[dict], spec: FigureSpec):
    """Convergence curves: standard vs standardized kernel error against P."""
    fig, ax = plt.subplots(figsize=(7, 5))
    P, standard = _series_by_metric(rows, "mae_standard_vs_gauss")
    _, standardized = _series_by_metric(rows, "mae_std_vs_gauss")
    ax.plot(P, standard, marker="o", color="tab:blue", label="standard RFF")
    ax.plot(P, standardized, marker="s", color="tab:red", label="standardized RFF")
    if spec.reference_slope:
        _reference_line(ax, P, standard[0])
    if spec.log_axes:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("number of features P")
    ax.set_ylabel("mean |kernel error|")
    ax.set_title("Kernel approximation error vs number of features")
    ax.legend()
    return fig


def build_fig5(rows: list[dict], spec: FigureSpec):
    """Three-curve convergence with the limit-kernel oracle series."""
    fig, ax = plt.subplots(figsize=(7, 5))
    P, standard = _series_by_metric(rows, "mae_standard_vs_gauss")
    _, standardized = _series_by_metric(rows, "mae_std_vs_gauss")
    _, oracle = _series_by_metric(rows, "mae_std_vs_oracle")
    ax.plot(P, standard, marker="o", color="tab:blue", label="standard vs Gaussian")
    ax.plot(P, standardized, marker="s", color="tab:red", label="standardized vs Gaussian")
    ax.plot(P, oracle, marker="^", color="tab:green", label="standardized vs its limit")
    if spec.reference_slope:
        _reference_line(ax, P, standard[0])
    if spec.log_axes:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("number of features P")
    ax.set_ylabel("mean |kernel error|")
    ax.set_title("Standardized features converge to their own limit kernel")
    ax.legend()
    return fig


_PARAMS = ("P", "T", "gamma", "K")


def _modal(values: list) -> object:
    uniq, counts = np.unique(np.asarray(values), return_counts=True)
    return uniq[np.argmax(counts)].item()


def _marginal(rows: list[dict], param: str, value_col: str) -> tuple[list, list]:
    """One-at-a-time slice: the other parameters pinned at their modal values."""
    others = [p for p in _PARAMS if p != param]
    base = {p: _modal([r[p] for r in rows]) for p in others}
    slice_rows = [r for r in rows if all(r[p] == base[p] for p in others)]
    if not slice_rows:
        slice_rows = rows
    points = sorted({r[param] for r in slice_rows})
    values = []
    for point in points:
        matched = [r[value_col] for r in slice_rows if r[param] == point]
        values.append(float(np.mean(matched)))
    return points, values


def _panel_grid(rows: list[dict], value_col: str, ylabel: str, title: str):
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    labels = {"P": "features P", "T": "window T (months)", "gamma": "bandwidth gamma", "K": "input dimension K"}
    for ax, param in zip(axes.ravel(), _PARAMS):
        points, values = _marginal(rows, param, value_col)
        ax.bar([str(p) for p in points], values, color="tab:blue")
        ax.set_xlabel(labels[param])
        ax.set_ylabel(ylabel)
    fig.suptitle(title)
    fig.tight_layout()
    return fig


def build_fig2(rows: list[dict], spec: FigureSpec):
    """Degradation-factor bar panels across the four swept parameters."""
    fig = _panel_grid(rows, "degradation", "degradation factor", "Degradation factor across the parameter space")
    for ax in fig.axes:
        ax.axhline(1.0, color="black", linewidth=0.8)
    return fig


def build_fig4(rows: list[dict], spec: FigureSpec):
    """KS-statistic bar panels across the four swept parameters."""
    return _panel_grid(rows, "ks_stat", "KS statistic", "KS separation of error distributions")


def _heatmap(ax, rows: list[dict], x_param: str, y_param: str, pinned: dict, clip_percentile: float):
    grid_rows = [r for r in rows if all(r[p] == v for p, v in pinned.items())]
    xs = sorted({r[x_param] for r in grid_rows})
    ys = sorted({r[y_param] for r in grid_rows})
    matrix = np.full((len(ys), len(xs)), np.nan)
    for r in grid_rows:
        matrix[ys.index(r[y_param]), xs.index(r[x_param])] = r["degradation"]
    if np.all(np.isnan(matrix)):
        raise SchemaError(f"no rows form a ({x_param}, {y_param}) cross-section")
    vmax = float(np.nanpercentile(matrix, clip_percentile))
    image = ax.imshow(matrix, origin="lower", aspect="auto", cmap="viridis", vmin=0.0, vmax=vmax)
    for i in range(len(ys)):
        for j in range(len(xs)):
            if not np.isnan(matrix[i, j]):
                ax.text(j, i, f"{matrix[i, j]:.1f}", ha="center", va="center", fontsize=8, color="white")
    ax.set_xticks(range(len(xs)), [str(x) for x in xs])
    ax.set_yticks(range(len(ys)), [str(y) for y in ys])
    ax.set_xlabel(x_param)
    ax.set_ylabel(y_param)
    return image


def build_fig3(rows: list[dict], spec: FigureSpec):
    """Degradation heatmaps over the (P, T) and (P, gamma) cross-sections."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(12, 5))
    base_gamma = _modal([r["gamma"] for r in rows])
    base_K = _modal([r["K"] for r in rows])
    base_T = _modal([r["T"] for r in rows])
    im1 = _heatmap(left, rows, "P", "T", {"gamma": base_gamma, "K": base_K}, spec.clip_percentile)
    im2 = _heatmap(right, rows, "P", "gamma", {"T": base_T, "K": base_K}, spec.clip_percentile)
    fig.colorbar(im1, ax=left, label="degradation")
    fig.colorbar(im2, ax=right, label="degradation")
    fig.suptitle("Degradation factor heatmaps")
    fig.tight_layout()
    return fig


def _calibration_panels(rows: list[dict], keyword: str, title: str):
    names = []
    for r in rows:
        if keyword in r["scenario"] and r["scenario"] not in names:
            names.append(r["scenario"])
    if not names:
        raise SchemaError(f"no scenarios matching {keyword!r} in the calibration CSV")
    cols = 2 if len(names) > 1 else 1
    rows_n = int(np.ceil(len(names) / cols))
    fig, axes = plt.subplots(rows_n, cols, figsize=(6 * cols, 4 * rows_n), squeeze=False)
    for ax, name in zip(axes.ravel(), names):
        scenario_rows = sorted((r for r in rows if r["scenario"] == name), key=lambda r: r["P"])
        P = [str(r["P"]) for r in scenario_rows]
        months = [r["t_crit_months"] for r in scenario_rows]
        ax.bar(P, months, color="tab:blue", label="critical sample size")
        t_op = scenario_rows[0]["T_operational"]
        ax.axhline(t_op, color="tab:red", linewidth=1.5, label=f"operational T = {t_op:g}")
        for x, m in zip(P, months):
            ax.annotate(f"{m:.0f}", (x, m), ha="center", va="bottom", fontsize=8)
        ax.set_title(name)
        ax.set_xlabel("features P")
        ax.set_ylabel("months")
        ax.legend(fontsize=8)
    for ax in axes.ravel()[len(names):]:
        ax.axis("off")
    fig.suptitle(title)
    fig.tight_layout()
    return fig


def build_fig6(rows: list[dict], spec: FigureSpec):
    """Critical-sample-size bars across signal-strength scenarios."""
    return _calibration_panels(rows, "signal", "Training-data requirements vs signal strength")


def build_fig7(rows: list[dict], spec: FigureSpec):
    """Critical-sample-size bars across noise-variance scenarios."""
    return _calibration_panels(rows, "noise", "Training-data requirements vs noise variance")


_BUILDERS = {
    "fig1": build_fig1,
    "fig2": build_fig2,
    "fig3": build_fig3,
    "fig4": build_fig4,
    "fig5": build_fig5,
    "fig6": build_fig6,
    "fig7": build_fig7,
}


def build_figure(spec: FigureSpec):
    """Read the inputs and return the assembled matplotlib figure."""
    rows = read_rows(spec.inputs, _REQUIRED_COLUMNS[spec.figure])
    return _BUILDERS[spec.figure](rows, spec)


def render(spec: FigureSpec) -> Path:
    """Render the figure to its output path; nothing is written on failure."""
    fig = build_figure(spec)
    try:
        spec.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.output, dpi=150)
    finally:
        plt.close(fig)
    return spec.output
