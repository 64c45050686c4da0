"""Norm curve families and photon-probability heatmaps.

Output images come in a vector + raster pair whose names derive from the
input CSV names.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import CsvTable, HeaderMismatchError, finite_or_nan, read_table, require_columns

FORMATS = ("svg", "png")


@dataclass(frozen=True)
class PlotSpec:
    kind: str  # "curve-family" | "heatmap"
    out_dir: Path
    value_column: str = "norm3"
    x_scale: str = "log"
    y_scale: str = "log"
    dpi: int = 200

    def __post_init__(self):
        if self.kind not in ("curve-family", "heatmap"):
            raise ValueError(f"unknown plot kind {self.kind!r}")
        for scale in (self.x_scale, self.y_scale):
            if scale not in ("log", "lin"):
                raise ValueError(f"axis scale must be log or lin, got {scale!r}")


def _mpl_scale(scale: str) -> str:
    return "log" if scale == "log" else "linear"


def _save_pair(fig, out_dir: Path, stem: str, dpi: int) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for ext in FORMATS:
        dest = out_dir / f"{stem}.{ext}"
        fig.savefig(dest, dpi=dpi, bbox_inches="tight")
        paths.append(dest)
    plt.close(fig)
    return paths


def _family_stem(tables: list[CsvTable]) -> str:
    stems = [t.path.stem for t in tables]
    prefix = os.path.commonprefix(stems).rstrip("-_")
    return f"{prefix or stems[0]}-curves"


def build_curve_figure(tables: list[CsvTable], spec: PlotSpec):
    """One axes, one line per table; the caller owns the figure."""
    axis_grids = []
    for t in tables:
        require_columns(t, ("axis", spec.value_column, "flags"))
        axis_grids.append(np.asarray(finite_or_nan(t.column("axis"))))
    base = axis_grids[0]
    for t, grid in zip(tables[1:], axis_grids[1:]):
        # shared-axis contract: identical grids, no silent interpolation
        if grid.shape != base.shape or not np.array_equal(grid, base):
            raise HeaderMismatchError(
                f"{t.path.name} axis grid differs from {tables[0].path.name}"
            )
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for t, grid in zip(tables, axis_grids):
        ax.plot(grid, finite_or_nan(t.column(spec.value_column)), label=t.label)
    ax.set_xscale(_mpl_scale(spec.x_scale))
    ax.set_yscale(_mpl_scale(spec.y_scale))
    ax.set_xlabel(tables[0].meta.get("axis", "axis"))
    ax.set_ylabel(spec.value_column)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    return fig


def plot_norm_curves(csv_paths, spec: PlotSpec) -> list[Path]:
    """Curve family from sweep CSVs sharing one axis grid.

    Returns the written image paths (vector + raster).
    """
    if not csv_paths:
        raise HeaderMismatchError("no input CSVs")
    tables = [read_table(p) for p in csv_paths]
    fig = build_curve_figure(tables, spec)
    return _save_pair(fig, spec.out_dir, _family_stem(tables), spec.dpi)


def _map_panels(table: CsvTable):
    """(x, y, P0, P1) meshes from a map table; filter is the fast column."""
    require_columns(table, ("axis", "filter", "p0", "p1", "flags"))
    axis = np.asarray(finite_or_nan(table.column("axis")))
    filt = np.asarray(finite_or_nan(table.column("filter")))
    x = np.unique(axis)
    y = np.unique(filt)
    if x.size * y.size != len(table.rows):
        raise HeaderMismatchError(
            f"{table.path.name} is not a complete {x.size} x {y.size} grid"
        )
    shape = (x.size, y.size)
    p0 = np.asarray(finite_or_nan(table.column("p0"))).reshape(shape)
    p1 = np.asarray(finite_or_nan(table.column("p1"))).reshape(shape)
    return x, y, p0, p1


def build_map_figure(table: CsvTable, spec: PlotSpec):
    x, y, p0, p1 = _map_panels(table)
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.8), sharey=True)
    for ax, data, name in ((axes[0], p0, "p0"), (axes[1], p1, "p1")):
        # pcolormesh wants cell data transposed: rows = y, cols = x
        mesh = ax.pcolormesh(
            _edges(x, spec.x_scale), _edges(y, spec.y_scale),
            np.ma.masked_invalid(data.T), shading="flat",
        )
        ax.set_xscale(_mpl_scale(spec.x_scale))
        ax.set_yscale(_mpl_scale(spec.y_scale))
        ax.set_xlabel(table.meta.get("axis", "axis"))
        ax.set_title(name)
        fig.colorbar(mesh, ax=ax)
    axes[0].set_ylabel("filter linewidth")
    return fig


def _edges(centers: np.ndarray, scale: str) -> np.ndarray:
    """Cell edges around given centers; tolerates a single-point axis."""
    if centers.size == 1:
        c = centers[0]
        pad = 0.5 * abs(c) if c != 0 else 0.5
        return np.array([c - pad, c + pad])
    if scale == "log":
        logc = np.log(centers)
        mid = (logc[:-1] + logc[1:]) / 2.0
        first = 2 * logc[0] - mid[0]
        last = 2 * logc[-1] - mid[-1]
        return np.exp(np.concatenate([[first], mid, [last]]))
    mid = (centers[:-1] + centers[1:]) / 2.0
    return np.concatenate([[2 * centers[0] - mid[0]], mid, [2 * centers[-1] - mid[-1]]])


def plot_probability_maps(csv_path, spec: PlotSpec) -> list[Path]:
    """Two heatmaps (p0, p1) for one map CSV; returns written paths."""
    table = read_table(csv_path)
    fig = build_map_figure(table, spec)
    return _save_pair(fig, spec.out_dir, f"{table.path.stem}-maps", spec.dpi)
