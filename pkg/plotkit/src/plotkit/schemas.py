"""Readers for the documented CSV schemas of the dopocat artifacts.

This package renders files; it never recomputes physics. Each reader
validates the header and shape it documents and raises :class:`SchemaError`
on any mismatch, so figure code downstream can assume well-formed data.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SchemaError",
    "SweepTable",
    "Timeseries",
    "WignerTable",
    "read_boundary",
    "read_sweep_points",
    "read_timeseries",
    "read_wigner_section",
]

TIMESERIES_HEADER = ["t", "lp_opt", "var_modular", "var_integer", "c_mec"]
POINTS_FIXED_COLUMNS = ["c_mec_min", "time_at_min", "lp_at_min",
                        "purity_at_min", "status"]
WIGNER_HEADER = ["coord1", "coord2", "value"]


class SchemaError(ValueError):
    """An input file does not match the documented schema."""


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a header row")
    return rows[0], rows[1:]


def _parse_float(token: str, path, column: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise SchemaError(f"{path}: non-numeric value {token!r} "
                          f"in column {column}") from None


@dataclass(frozen=True)
class Timeseries:
    """Per-sample qualifier evolution: equal-length 1D arrays."""

    t: np.ndarray
    lp_opt: np.ndarray
    var_modular: np.ndarray
    var_integer: np.ndarray
    c_mec: np.ndarray


def read_timeseries(path) -> Timeseries:
    header, rows = _read_rows(path)
    if header != TIMESERIES_HEADER:
        raise SchemaError(f"{path}: header {header} does not match the "
                          f"timeseries schema {TIMESERIES_HEADER}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.empty((len(rows), 5))
    for i, row in enumerate(rows):
        if len(row) != 5:
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} fields, "
                              f"expected 5")
        data[i] = [_parse_float(v, path, TIMESERIES_HEADER[j])
                   for j, v in enumerate(row)]
    return Timeseries(*(data[:, j] for j in range(5)))


@dataclass(frozen=True)
class SweepTable:
    """A complete 2D sweep grid pivoted from the points CSV."""

    axis1_name: str
    axis2_name: str
    axis1_values: np.ndarray    # sorted unique, length nx
    axis2_values: np.ndarray    # sorted unique, length ny
    c_mec_min: np.ndarray       # shape (nx, ny), NaN for failed cells
    status: np.ndarray          # same shape, dtype object


def read_sweep_points(path) -> SweepTable:
    header, rows = _read_rows(path)
    if len(header) != 7 or header[2:] != POINTS_FIXED_COLUMNS:
        raise SchemaError(f"{path}: header {header} does not match the sweep "
                          f"points schema <axis1>,<axis2>,"
                          + ",".join(POINTS_FIXED_COLUMNS))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    a1, a2, c, st = [], [], [], []
    for i, row in enumerate(rows):
        if len(row) != 7:
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} fields, "
                              f"expected 7")
        a1.append(_parse_float(row[0], path, header[0]))
        a2.append(_parse_float(row[1], path, header[1]))
        c.append(_parse_float(row[2], path, "c_mec_min"))
        st.append(row[6])
    v1 = np.unique(np.asarray(a1))
    v2 = np.unique(np.asarray(a2))
    if v1.size * v2.size != len(rows):
        raise SchemaError(f"{path}: {len(rows)} rows do not fill the "
                          f"{v1.size} x {v2.size} grid of axis values")
    grid = np.full((v1.size, v2.size), math.nan)
    status = np.full((v1.size, v2.size), "", dtype=object)
    seen = np.zeros((v1.size, v2.size), dtype=bool)
    for x, y, value, cell_status in zip(a1, a2, c, st):
        i = int(np.searchsorted(v1, x))
        j = int(np.searchsorted(v2, y))
        if seen[i, j]:
            raise SchemaError(f"{path}: duplicate grid cell "
                              f"({header[0]}={x}, {header[1]}={y})")
        seen[i, j] = True
        grid[i, j] = value
        status[i, j] = cell_status
    return SweepTable(header[0], header[1], v1, v2, grid, status)


def read_boundary(path, axis1_name: str, axis2_name: str) -> list[np.ndarray]:
    """Boundary polylines: header `<axis1>,<axis2>`, chains separated by
    blank lines. Returns a (possibly empty) list of (n, 2) arrays."""
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"input file not found: {path}")
    lines = path.read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file, expected a header row")
    expected = f"{axis1_name},{axis2_name}"
    if lines[0].strip() != expected:
        raise SchemaError(f"{path}: header {lines[0]!r} does not match the "
                          f"boundary schema {expected!r}")
    chains: list[np.ndarray] = []
    current: list[tuple[float, float]] = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            if current:
                chains.append(np.asarray(current))
                current = []
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise SchemaError(f"{path}: line {k} has {len(parts)} fields, "
                              f"expected 2")
        current.append((_parse_float(parts[0], path, axis1_name),
                        _parse_float(parts[1], path, axis2_name)))
    if current:
        chains.append(np.asarray(current))
    return chains


@dataclass(frozen=True)
class WignerTable:
    """A Wigner section on a complete shared coordinate grid."""

    coords1: np.ndarray     # sorted unique, length n1
    coords2: np.ndarray     # sorted unique, length n2
    values: np.ndarray      # shape (n1, n2)


def read_wigner_section(path) -> WignerTable:
    header, rows = _read_rows(path)
    if header != WIGNER_HEADER:
        raise SchemaError(f"{path}: header {header} does not match the "
                          f"Wigner section schema {WIGNER_HEADER}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    c1, c2, val = [], [], []
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} fields, "
                              f"expected 3")
        c1.append(_parse_float(row[0], path, "coord1"))
        c2.append(_parse_float(row[1], path, "coord2"))
        val.append(_parse_float(row[2], path, "value"))
    v1 = np.unique(np.asarray(c1))
    v2 = np.unique(np.asarray(c2))
    if v1.size * v2.size != len(rows):
        raise SchemaError(f"{path}: {len(rows)} rows do not fill the "
                          f"{v1.size} x {v2.size} coordinate grid")
    if not np.all(np.isfinite(val)):
        raise SchemaError(f"{path}: section contains non-finite values")
    grid = np.full((v1.size, v2.size), math.nan)
    for x, y, value in zip(c1, c2, val):
        grid[int(np.searchsorted(v1, x)), int(np.searchsorted(v2, y))] = value
    if not np.all(np.isfinite(grid)):
        raise SchemaError(f"{path}: duplicate coordinates leave grid cells "
                          f"unfilled")
    return WignerTable(v1, v2, grid)
