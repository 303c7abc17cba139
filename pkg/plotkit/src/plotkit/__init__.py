"""Figure rendering for dopocat CSV artifacts.

Three figure kinds, one per documented artifact schema:

- ``timeseries``: qualifier evolution panels with the threshold line
- ``heatmap``: 2D sweep grid, red below / blue above threshold, with the
  extracted boundary drawn in black
- ``wigner``: joint Wigner section on a diverging colormap centered at zero

This package only reads the documented CSV schemas; it never recomputes
physics, so the simulation suite runs without it.
"""
from .figures import (
    DEFAULT_THRESHOLD,
    FIGURE_KINDS,
    FigureSpec,
    plot_sweep,
    plot_timeseries,
    plot_wigner,
    render,
)
from .schemas import (
    SchemaError,
    SweepTable,
    Timeseries,
    WignerTable,
    read_boundary,
    read_sweep_points,
    read_timeseries,
    read_wigner_section,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "FIGURE_KINDS",
    "FigureSpec",
    "SchemaError",
    "SweepTable",
    "Timeseries",
    "WignerTable",
    "plot_sweep",
    "plot_timeseries",
    "plot_wigner",
    "read_boundary",
    "read_sweep_points",
    "read_timeseries",
    "read_wigner_section",
    "render",
]
