"""Render dopocat artifacts to PNG figures.

Rendering is a pure function of the input files: fixed figure geometry,
fixed fonts, no timestamps or environment-dependent metadata, so re-running
any plot over the same inputs reproduces the output byte for byte.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
from matplotlib.colors import ListedColormap  # noqa: E402

from .schemas import (  # noqa: E402
    SchemaError,
    read_boundary,
    read_sweep_points,
    read_timeseries,
    read_wigner_section,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "FIGURE_KINDS",
    "FigureSpec",
    "plot_sweep",
    "plot_timeseries",
    "plot_wigner",
    "render",
]

DEFAULT_THRESHOLD = 0.1565
FIGURE_KINDS = ("timeseries", "heatmap", "wigner")

BELOW_COLOR = "#c0392b"   # certified (below threshold)
ABOVE_COLOR = "#2e6da4"   # not certified
FAILED_COLOR = "#b0b0b0"  # numerical failure / missing cell

_SAVE_OPTIONS = dict(dpi=150, metadata={"Software": None})


@dataclass(frozen=True)
class FigureSpec:
    """A renderable figure: input CSVs, figure kind, threshold, output path."""

    kind: str
    inputs: tuple
    output: str
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"kind must be one of {FIGURE_KINDS}, "
                             f"got {self.kind!r}")
        expected = 2 if self.kind == "heatmap" else 1
        if len(self.inputs) != expected:
            raise ValueError(f"{self.kind} needs {expected} input file(s), "
                             f"got {len(self.inputs)}")
        if not self.threshold > 0.0:
            raise ValueError("threshold must be positive")


def render(spec: FigureSpec) -> Path:
    """Render a :class:`FigureSpec` to its output path."""
    if spec.kind == "timeseries":
        return plot_timeseries(spec.inputs[0], spec.output,
                               threshold=spec.threshold)
    if spec.kind == "heatmap":
        return plot_sweep(spec.inputs[0], spec.inputs[1], spec.output,
                          threshold=spec.threshold)
    return plot_wigner(spec.inputs[0], spec.output)


def _finish(fig, output) -> Path:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, **_SAVE_OPTIONS)
    plt.close(fig)
    return output


def plot_timeseries(csv_path, output, *,
                    threshold: float = DEFAULT_THRESHOLD) -> Path:
    """Four panels: the qualifier with its threshold line, the optimal
    period, and the two variance components."""
    series = read_timeseries(csv_path)
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.0), sharex=True)
    panels = (
        (axes[0, 0], series.c_mec, "c_mec"),
        (axes[0, 1], series.lp_opt, "lp_opt"),
        (axes[1, 0], series.var_modular, "var_modular"),
        (axes[1, 1], series.var_integer, "var_integer"),
    )
    marker = dict(marker="o", markersize=3) if series.t.size == 1 else {}
    for ax, values, label in panels:
        ax.plot(series.t, values, color=ABOVE_COLOR, linewidth=1.5, **marker)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0, 0].axhline(threshold, color=BELOW_COLOR, linewidth=1.0,
                       linestyle="--", label=f"threshold {threshold:g}")
    axes[0, 0].legend(loc="best", fontsize=8)
    for ax in axes[1]:
        ax.set_xlabel("t")
    fig.suptitle(Path(csv_path).stem)
    fig.tight_layout()
    return _finish(fig, output)


def plot_sweep(points_csv, boundary_csv, output, *,
               threshold: float = DEFAULT_THRESHOLD) -> Path:
    """Below-threshold cells in red, the rest in blue, failed cells in gray,
    with the threshold boundary drawn as black polylines."""
    table = read_sweep_points(points_csv)
    chains = read_boundary(boundary_csv, table.axis1_name, table.axis2_name)

    with np.errstate(invalid="ignore"):
        coded = np.where(table.c_mec_min < threshold, 0.0, 1.0)
    coded = np.ma.masked_where(~np.isfinite(table.c_mec_min), coded)
    if coded.count() and coded.min() == 1.0:
        warnings.warn(f"no cells fall below threshold {threshold:g}; "
                      f"the grid renders all blue", RuntimeWarning)

    fig, ax = plt.subplots(figsize=(7.0, 5.5))
    cmap = ListedColormap([BELOW_COLOR, ABOVE_COLOR])
    cmap.set_bad(FAILED_COLOR)
    # cell-centered coordinates; pcolormesh wants axis2 along rows
    ax.pcolormesh(table.axis1_values, table.axis2_values, coded.T,
                  cmap=cmap, vmin=0.0, vmax=1.0, shading="nearest")
    for chain in chains:
        ax.plot(chain[:, 0], chain[:, 1], color="black", linewidth=1.8)
    handles = [
        plt.Line2D([], [], marker="s", linestyle="", color=BELOW_COLOR,
                   label=f"c_mec_min < {threshold:g}"),
        plt.Line2D([], [], marker="s", linestyle="", color=ABOVE_COLOR,
                   label=f"c_mec_min >= {threshold:g}"),
    ]
    if chains:
        handles.append(plt.Line2D([], [], color="black", label="boundary"))
    else:
        ax.set_title("no threshold crossing on this grid", fontsize=10)
    ax.legend(handles=handles, loc="upper right", fontsize=8,
              framealpha=0.9)
    ax.set_xlabel(table.axis1_name)
    ax.set_ylabel(table.axis2_name)
    fig.tight_layout()
    return _finish(fig, output)


def plot_wigner(section_csv, output) -> Path:
    """Wigner section heatmap on a diverging colormap centered at zero, so
    negative quasi-probability always reads as the opposite hue."""
    table = read_wigner_section(section_csv)
    scale = float(np.max(np.abs(table.values)))
    if scale == 0.0:
        scale = 1.0
    fig, ax = plt.subplots(figsize=(6.4, 5.4))
    mesh = ax.pcolormesh(table.coords1, table.coords2, table.values.T,
                         cmap="RdBu_r", vmin=-scale, vmax=scale,
                         shading="nearest")
    fig.colorbar(mesh, ax=ax, label="W")
    ax.set_xlabel("mode 1 coordinate")
    ax.set_ylabel("mode 2 coordinate")
    ax.set_aspect("equal")
    fig.tight_layout()
    return _finish(fig, output)
