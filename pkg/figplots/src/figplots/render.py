"""Rendering backends for the three figure kinds.

All readers are strict about the harness CSV schemas and raise
:class:`SchemaError` naming the missing columns; rendering itself is
read-only over the parsed data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("attractor3d", "state_timeseries", "sweep_curves")

TRAJECTORY_COLUMNS = ("t", "x1", "x2", "x3")
AGGREGATE_COLUMNS = ("mode", "sigma", "mean_delta", "std_delta", "divergence_fraction")


class SchemaError(ValueError):
    """A CSV is missing columns required by the requested figure kind."""


@dataclass(frozen=True)
class PlotJob:
    kind: str
    inputs: Sequence[str]
    output: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def _parse_float(text: str) -> float:
    if text == "inf":
        return math.inf
    if text == "-inf":
        return -math.inf
    if text == "nan":
        return math.nan
    return float(text)


def _read_csv(path: str, required: Sequence[str]) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            return []  # empty file: no rows, caller decides
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing required columns {missing}; found {header}"
            )
        return list(reader)


def read_trajectory(path: str) -> Dict[str, np.ndarray]:
    rows = _read_csv(path, TRAJECTORY_COLUMNS)
    out = {c: np.array([_parse_float(r[c]) for r in rows]) for c in TRAJECTORY_COLUMNS}
    return out


def read_aggregates(path: str) -> List[Dict[str, object]]:
    rows = _read_csv(path, AGGREGATE_COLUMNS)
    parsed = []
    for r in rows:
        parsed.append(
            {
                "mode": r["mode"],
                "sigma": _parse_float(r["sigma"]),
                "mean_delta": _parse_float(r["mean_delta"]),
                "std_delta": _parse_float(r["std_delta"]),
                "divergence_fraction": _parse_float(r["divergence_fraction"]),
            }
        )
    return parsed


def render_attractor3d(job: PlotJob) -> None:
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    for path in job.inputs:
        data = read_trajectory(path)
        ax.plot(data["x1"], data["x2"], data["x3"], linewidth=0.5)
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_zlabel("$x_3$")
    fig.savefig(job.output, dpi=150)
    plt.close(fig)


def render_state_timeseries(job: PlotJob) -> None:
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 6))
    for path in job.inputs:
        data = read_trajectory(path)
        for ax, name in zip(axes, ("x1", "x2", "x3")):
            ax.plot(data["t"], data[name], linewidth=0.7, label=path if len(job.inputs) > 1 else None)
    for ax, name in zip(axes, ("x_1", "x_2", "x_3")):
        ax.set_ylabel(f"${name}$")
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("t [s]")
    if len(job.inputs) > 1:
        axes[0].legend(fontsize=7)
    fig.savefig(job.output, dpi=150)
    plt.close(fig)


def sweep_series(rows: Sequence[Dict[str, object]]) -> Dict[str, Dict[str, np.ndarray]]:
    """Group aggregate rows into per-mode (sigma, mean, std) arrays."""
    series: Dict[str, Dict[str, list]] = {}
    for r in rows:
        s = series.setdefault(str(r["mode"]), {"sigma": [], "mean": [], "std": []})
        s["sigma"].append(r["sigma"])
        s["mean"].append(r["mean_delta"])
        s["std"].append(r["std_delta"])
    out = {}
    for mode, s in series.items():
        order = np.argsort(s["sigma"])
        out[mode] = {
            "sigma": np.asarray(s["sigma"])[order],
            "mean": np.asarray(s["mean"])[order],
            "std": np.asarray(s["std"])[order],
        }
    return out


def render_sweep_curves(job: PlotJob) -> None:
    rows: List[Dict[str, object]] = []
    for path in job.inputs:
        rows.extend(read_aggregates(path))
    fig, ax = plt.subplots(figsize=(7, 5))
    for mode, s in sorted(sweep_series(rows).items()):
        mean = np.where(np.isfinite(s["mean"]), s["mean"], np.nan)
        std = np.where(np.isfinite(s["std"]), s["std"], 0.0)
        ax.plot(s["sigma"], mean, marker="o", label=mode)
        ax.fill_between(s["sigma"], np.maximum(mean - std, 1e-12), mean + std, alpha=0.2)
    ax.set_xlabel(r"$\sigma$")
    ax.set_ylabel(r"mean $\delta$")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    if rows:
        ax.legend()
    fig.savefig(job.output, dpi=150)
    plt.close(fig)


RENDERERS = {
    "attractor3d": render_attractor3d,
    "state_timeseries": render_state_timeseries,
    "sweep_curves": render_sweep_curves,
}


def render(job: PlotJob) -> None:
    RENDERERS[job.kind](job)
