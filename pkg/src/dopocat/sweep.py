"""Batch front-end: validated run configurations, single runs with artifact
files, 2D parameter sweeps with per-cell failure isolation, threshold-boundary
extraction, and a binary state-snapshot format.

All rates are ratios to the two-photon rate, so configurations must keep
gamma_d = 1. Artifacts use fixed float formatting and fixed row orderings, so
identical configurations produce byte-identical files regardless of the
worker count. Worker count comes from the sweep configuration, overridable
with the DOPOCAT_WORKERS environment variable.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from dopocat.analysis import wigner_section, write_section_csv
from dopocat.fock import DensityMatrix, ModeSpace, cat_state, pad_state
from dopocat.lindblad import (
    EIG_ABORT,
    TRACE_ABORT,
    IntegrationControls,
    IntegrationError,
    ModelParams,
    integrate,
    integrate_single_mode,
    vacuum_state,
)
from dopocat.modular import (
    ENTANGLEMENT_THRESHOLD,
    CriterionEvaluator,
    VariableSet,
)
from dopocat.quadrature import QuadratureGrid, default_grid

__all__ = [
    "RunConfig",
    "SweepAxis",
    "SweepConfig",
    "SweepResult",
    "extract_boundary",
    "load_run_config",
    "load_sweep_config",
    "read_snapshot",
    "run_single",
    "run_squeezed_suite",
    "run_sweep",
    "write_snapshot",
]

WORKERS_ENV_VAR = "DOPOCAT_WORKERS"

_AXIS_NAMES = ("S", "gamma_s", "gamma_c", "gamma_sq")
_MODES = ("coupled", "single")
_COUPLED_OUTPUTS = ("qualifier", "timeseries", "wigner", "purity", "snapshot")
_SINGLE_OUTPUTS = ("fidelity", "purity", "snapshot")
_STATUS_OK = "ok"
_STATUS_HORIZON = "horizon-warning"
_STATUS_FAILURE = "numerical-failure"
_FMT = "%.10g"


def _fmt(value: float) -> str:
    return _FMT % value


# ---------------------------------------------------------------------------
# configurations


def _check_tag(tag: str) -> str:
    if not tag or not all(ch.isalnum() or ch in "._-" for ch in tag):
        raise ValueError(f"tag must be a nonempty filename-safe token, got {tag!r}")
    return tag


@dataclass(frozen=True)
class RunConfig:
    """One fully specified run: model, integration, grids, and output set."""

    tag: str
    params: ModelParams
    controls: IntegrationControls
    cutoff: int
    mode: str = "coupled"
    variables: VariableSet = VariableSet.EVEN_PARITY
    lp_min: float = 2.0
    lp_max: float = 6.0
    lp_step: float = 0.02
    grid_step: float = 0.05
    grid_half_width: float | None = None
    outputs: tuple = ("qualifier", "timeseries")

    def __post_init__(self):
        _check_tag(self.tag)
        if self.params.gamma_d != 1.0:
            raise ValueError(
                "rates are ratios to the two-photon rate: gamma_d must be 1")
        if not isinstance(self.cutoff, int) or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        object.__setattr__(self, "variables", VariableSet(self.variables))
        if not (0.0 < self.lp_min <= self.lp_max) or self.lp_step <= 0.0:
            raise ValueError("lp grid needs 0 < min <= max and a positive step")
        if self.grid_step <= 0.0:
            raise ValueError("grid_step must be positive")
        if self.grid_half_width is not None:
            # fail at load time if the explicit grid is inconsistent
            QuadratureGrid(half_width=self.grid_half_width, step=self.grid_step)
        allowed = _COUPLED_OUTPUTS if self.mode == "coupled" else _SINGLE_OUTPUTS
        outputs = tuple(self.outputs)
        for name in outputs:
            if name not in allowed:
                raise ValueError(
                    f"output {name!r} is not available in {self.mode} mode "
                    f"(allowed: {allowed})")
        object.__setattr__(self, "outputs", outputs)

    @property
    def alpha(self) -> complex:
        """Target lobe amplitude i*sqrt(2 S / gamma_d)."""
        return 1j * math.sqrt(2.0 * self.params.S / self.params.gamma_d)

    @property
    def lp_grid(self) -> np.ndarray:
        n = int(math.floor((self.lp_max - self.lp_min) / self.lp_step + 1e-9))
        return self.lp_min + self.lp_step * np.arange(n + 1)

    def quadrature_grid(self, alpha: complex | None = None) -> QuadratureGrid:
        if self.grid_half_width is not None:
            return QuadratureGrid(half_width=self.grid_half_width,
                                  step=self.grid_step)
        return default_grid(self.alpha if alpha is None else alpha,
                            self.params.gamma_sq, self.grid_step)


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter: evenly spaced values over [minimum, maximum]."""

    name: str
    minimum: float
    maximum: float
    count: int

    def __post_init__(self):
        if self.name not in _AXIS_NAMES:
            raise ValueError(f"axis must be one of {_AXIS_NAMES}, got {self.name!r}")
        if self.count < 2:
            raise ValueError(f"axis count must be >= 2, got {self.count}")
        if not (0.0 <= self.minimum < self.maximum):
            raise ValueError("axis needs 0 <= minimum < maximum")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.count)


@dataclass(frozen=True)
class SweepConfig:
    """A 2D grid of runs sharing one base configuration."""

    tag: str
    axis1: SweepAxis
    axis2: SweepAxis
    base: RunConfig
    workers: int = 1

    def __post_init__(self):
        _check_tag(self.tag)
        if self.axis1.name == self.axis2.name:
            raise ValueError("the two sweep axes must differ")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.base.mode != "coupled":
            raise ValueError("sweeps evaluate the pair criterion; base mode "
                             "must be 'coupled'")


def _from_mapping(cls, raw: dict, where: str):
    fields = {f for f in cls.__dataclass_fields__}
    unknown = set(raw) - fields
    if unknown:
        raise ValueError(f"unknown {where} keys: {sorted(unknown)}")
    return cls(**raw)


def _run_config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ValueError("run configuration must be a JSON object")
    raw = dict(raw)
    known = {"tag", "params", "controls", "cutoff", "mode", "variables",
             "lp_grid", "quadrature_grid", "outputs"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown run configuration keys: {sorted(unknown)}")
    kwargs = {
        "tag": raw.get("tag", "run"),
        "params": _from_mapping(ModelParams, raw.get("params", {}), "params"),
        "controls": _from_mapping(IntegrationControls, raw.get("controls", {}),
                                  "controls"),
        "cutoff": raw.get("cutoff", 16),
        "mode": raw.get("mode", "coupled"),
        "variables": raw.get("variables", "even_parity"),
    }
    lp = dict(raw.get("lp_grid", {}))
    if not set(lp) <= {"min", "max", "step"}:
        raise ValueError(f"unknown lp_grid keys: {sorted(set(lp) - {'min', 'max', 'step'})}")
    if lp:
        kwargs.update(lp_min=lp.get("min", 2.0), lp_max=lp.get("max", 6.0),
                      lp_step=lp.get("step", 0.02))
    qg = dict(raw.get("quadrature_grid", {}))
    if not set(qg) <= {"step", "half_width"}:
        raise ValueError(f"unknown quadrature_grid keys: "
                         f"{sorted(set(qg) - {'step', 'half_width'})}")
    if qg:
        kwargs.update(grid_step=qg.get("step", 0.05),
                      grid_half_width=qg.get("half_width"))
    if "outputs" in raw:
        kwargs["outputs"] = tuple(raw["outputs"])
    return RunConfig(**kwargs)


def _read_config_mapping(source) -> dict:
    if isinstance(source, dict):
        return source
    path = Path(source)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    return json.loads(path.read_text())


def load_run_config(source) -> RunConfig:
    """Parse a run configuration from a mapping or a JSON/TOML file path."""
    return _run_config_from_dict(_read_config_mapping(source))


def load_sweep_config(source) -> SweepConfig:
    """Parse a sweep configuration from a mapping or a JSON/TOML file path."""
    raw = _read_config_mapping(source)
    if not isinstance(raw, dict):
        raise ValueError("sweep configuration must be a JSON object")
    known = {"tag", "axis1", "axis2", "base", "workers"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown sweep configuration keys: {sorted(unknown)}")
    for key in ("tag", "axis1", "axis2", "base"):
        if key not in raw:
            raise ValueError(f"sweep configuration is missing {key!r}")
    def axis(block, where):
        block = dict(block)
        rename = {"min": "minimum", "max": "maximum"}
        block = {rename.get(k, k): v for k, v in block.items()}
        return _from_mapping(SweepAxis, block, where)
    return SweepConfig(
        tag=raw["tag"],
        axis1=axis(raw["axis1"], "axis1"),
        axis2=axis(raw["axis2"], "axis2"),
        base=_run_config_from_dict(raw["base"]),
        workers=int(raw.get("workers", 1)),
    )


# ---------------------------------------------------------------------------
# snapshots

_SNAPSHOT_MAGIC = b"DCST"


def write_snapshot(rho: DensityMatrix, path) -> None:
    """Binary state file: magic, little-endian uint32 (n_modes, cutoff), then
    the row-major complex128 (little-endian) density matrix."""
    with open(path, "wb") as fh:
        fh.write(_SNAPSHOT_MAGIC)
        fh.write(np.array([rho.space.n_modes, rho.space.cutoff],
                          dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(rho.data).astype("<c16").tobytes())


def read_snapshot(path) -> DensityMatrix:
    """Read a snapshot back, revalidating it as a physical state."""
    blob = Path(path).read_bytes()
    if blob[:4] != _SNAPSHOT_MAGIC:
        raise ValueError(f"{path} is not a state snapshot")
    n_modes, cutoff = (int(v) for v in np.frombuffer(blob[4:12], dtype="<u4"))
    space = ModeSpace(cutoff, n_modes)
    d = space.dim
    expected = 12 + 16 * d * d
    if len(blob) != expected:
        raise ValueError(f"snapshot size {len(blob)} does not match "
                         f"{n_modes} mode(s) at cutoff {cutoff}")
    m = np.frombuffer(blob[12:], dtype="<c16").reshape(d, d).astype(np.complex128)
    # evolved states may carry transient truncation negativity up to the
    # integrator's abort thresholds; accept exactly what the integrator does
    return DensityMatrix(m, space, trace_tol=TRACE_ABORT, eig_tol=EIG_ABORT)


# ---------------------------------------------------------------------------
# single runs


@lru_cache(maxsize=4)
def _cached_evaluator(cutoff: int, grid: QuadratureGrid, lp_tuple: tuple,
                      variables: VariableSet) -> CriterionEvaluator:
    return CriterionEvaluator(ModeSpace(cutoff, 2), grid,
                              np.asarray(lp_tuple), variables)


class _CriterionTracker:
    """Per-sample criterion rows plus the running-argmin state copy."""

    def __init__(self, evaluator: CriterionEvaluator, keep_state: bool):
        self.evaluator = evaluator
        self.keep_state = keep_state
        self.rows: list[tuple] = []
        self.purities: list[float] = []
        self.best_index = -1
        self.best_c = math.inf
        self.best_state: np.ndarray | None = None

    def __call__(self, t: float, rho: np.ndarray) -> None:
        var_mod, var_int = self.evaluator.variances(rho)
        total = var_mod + var_int
        i = int(np.argmin(total))
        self.rows.append((t, float(self.evaluator.lp_grid[i]),
                          float(var_mod[i]), float(var_int[i]), float(total[i])))
        self.purities.append(float(np.vdot(rho, rho).real))
        if total[i] < self.best_c:
            self.best_c = float(total[i])
            self.best_index = len(self.rows) - 1
            if self.keep_state:
                self.best_state = rho.copy()

    @property
    def status(self) -> str:
        return _STATUS_HORIZON if self.best_index == len(self.rows) - 1 else _STATUS_OK


def _write_rows_csv(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_echo(config: RunConfig) -> dict:
    p, c = config.params, config.controls
    return {
        "params": {"S": p.S, "gamma_s": p.gamma_s, "gamma_d": p.gamma_d,
                   "gamma_c": p.gamma_c, "gamma_sq": p.gamma_sq,
                   "theta_sq": p.theta_sq},
        "controls": {"dt": c.dt, "t_final": c.t_final,
                     "sample_every": c.sample_every},
        "cutoff": config.cutoff,
        "mode": config.mode,
        "variables": config.variables.value,
    }


def _wigner_pad_cutoff(amax: float, base: int) -> int:
    from dopocat.analysis import DISPLACEMENT_TOL, _displacement_defect

    candidates = [base] + [c for c in (32, 40, 48, 56, 64) if c > base]
    for c in candidates:
        if _displacement_defect(amax, c) <= DISPLACEMENT_TOL:
            return c
    return candidates[-1]


def _write_wigner(rho: DensityMatrix, alpha: complex, tag: str,
                  outdir: Path) -> list[str]:
    from dopocat.analysis import default_section_grid

    grid = default_section_grid(alpha)
    pad = _wigner_pad_cutoff(float(np.abs(grid).max()), rho.space.cutoff)
    state = rho if pad == rho.space.cutoff else pad_state(
        rho, ModeSpace(pad, rho.space.n_modes))
    names = []
    for plane in ("real", "imaginary"):
        section = wigner_section(state, plane, grid)
        name = f"{tag}__wigner_{plane}.csv"
        write_section_csv(section, outdir / name)
        names.append(name)
    return names


def run_single(config: RunConfig, outdir) -> dict:
    """Execute one run and write its artifacts; returns the summary payload.

    Coupled mode writes `<tag>__summary.json` always, plus the requested
    timeseries/purity CSVs, Wigner sections at the criterion argmin, and a
    binary snapshot of the argmin state. The qualifier (criterion minimum
    with its argmin time/scale and purity) always appears in the summary, so
    the 'qualifier' output needs no extra file. Single mode reports the
    transient cat fidelity instead of the pair criterion. Integration
    failures raise IntegrationError (the command-line wrapper converts them
    to error JSON).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if config.mode == "single":
        return _run_single_oscillator(config, outdir)

    space = ModeSpace(config.cutoff, 2)
    evaluator = _cached_evaluator(config.cutoff, config.quadrature_grid(),
                                  tuple(config.lp_grid), config.variables)
    keep_state = bool({"wigner", "snapshot"} & set(config.outputs))
    tracker = _CriterionTracker(evaluator, keep_state)
    integrate(vacuum_state(space), config.params, config.controls, space,
              observer=tracker)

    i = tracker.best_index
    t_min, lp_min, vm, vi, c_min = (tracker.rows[i][0], tracker.rows[i][1],
                                    tracker.rows[i][2], tracker.rows[i][3],
                                    tracker.rows[i][4])
    summary = {
        "tag": config.tag,
        "status": tracker.status,
        "threshold": ENTANGLEMENT_THRESHOLD,
        "c_mec_min": c_min,
        "time_at_min": t_min,
        "lp_at_min": lp_min,
        "var_modular_at_min": vm,
        "var_integer_at_min": vi,
        "purity_at_min": tracker.purities[i],
        "entangled": bool(c_min <= ENTANGLEMENT_THRESHOLD),
        "artifacts": [],
        **_config_echo(config),
    }
    artifacts = [f"{config.tag}__summary.json"]
    if "timeseries" in config.outputs:
        name = f"{config.tag}__timeseries.csv"
        _write_rows_csv(outdir / name,
                        "t,lp_opt,var_modular,var_integer,c_mec", tracker.rows)
        artifacts.append(name)
    if "purity" in config.outputs:
        name = f"{config.tag}__purity.csv"
        _write_rows_csv(outdir / name, "t,purity",
                        [(row[0], p) for row, p in
                         zip(tracker.rows, tracker.purities)])
        artifacts.append(name)
    best_state = None
    if keep_state:
        best_state = DensityMatrix(tracker.best_state, space,
                                   trace_tol=TRACE_ABORT, eig_tol=EIG_ABORT)
    if "wigner" in config.outputs:
        artifacts.extend(_write_wigner(best_state, config.alpha, config.tag,
                                       outdir))
    if "snapshot" in config.outputs:
        name = f"{config.tag}__state.bin"
        write_snapshot(best_state, outdir / name)
        artifacts.append(name)
    summary["artifacts"] = sorted(artifacts)
    _write_json(outdir / f"{config.tag}__summary.json", summary)
    return summary


def _run_single_oscillator(config: RunConfig, outdir: Path) -> dict:
    space = ModeSpace(config.cutoff)
    target = cat_state(config.alpha, 1, space).data
    rows: list[tuple] = []
    purities: list[float] = []
    best = {"i": -1, "f": -math.inf, "state": None}
    keep_state = "snapshot" in config.outputs

    def watch(t: float, rho: np.ndarray) -> None:
        f = float(np.vdot(target, rho @ target).real)
        rows.append((t, max(f, 0.0)))
        purities.append(float(np.vdot(rho, rho).real))
        if f > best["f"]:
            best.update(i=len(rows) - 1, f=f)
            if keep_state:
                best["state"] = rho.copy()

    integrate_single_mode(vacuum_state(space), config.params, config.controls,
                          space, observer=watch)
    i = best["i"]
    status = _STATUS_HORIZON if i == len(rows) - 1 else _STATUS_OK
    summary = {
        "tag": config.tag,
        "status": status,
        "max_fidelity": rows[i][1],
        "time_at_max": rows[i][0],
        "purity_at_max": purities[i],
        "artifacts": [],
        **_config_echo(config),
    }
    artifacts = [f"{config.tag}__summary.json"]
    if "fidelity" in config.outputs:
        name = f"{config.tag}__fidelity.csv"
        _write_rows_csv(outdir / name, "t,fidelity", rows)
        artifacts.append(name)
    if "purity" in config.outputs:
        name = f"{config.tag}__purity.csv"
        _write_rows_csv(outdir / name, "t,purity",
                        [(row[0], p) for row, p in zip(rows, purities)])
        artifacts.append(name)
    if "snapshot" in config.outputs:
        name = f"{config.tag}__state.bin"
        write_snapshot(DensityMatrix(best["state"], space,
                                     trace_tol=TRACE_ABORT, eig_tol=EIG_ABORT),
                       outdir / name)
        artifacts.append(name)
    summary["artifacts"] = sorted(artifacts)
    _write_json(outdir / f"{config.tag}__summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepResult:
    """Per-cell qualifier minima over a 2D parameter grid, plus the boundary."""

    tag: str
    axis1_name: str
    axis2_name: str
    axis1_values: np.ndarray
    axis2_values: np.ndarray
    c_mec_min: np.ndarray
    time_at_min: np.ndarray
    lp_at_min: np.ndarray
    purity_at_min: np.ndarray
    status: np.ndarray
    boundary: np.ndarray

    def below_threshold_count(self, threshold: float = ENTANGLEMENT_THRESHOLD) -> int:
        with np.errstate(invalid="ignore"):
            return int(np.sum(self.c_mec_min < threshold))


def _cell_params(base: ModelParams, names_values: dict) -> ModelParams:
    fields = {"S": base.S, "gamma_s": base.gamma_s, "gamma_d": base.gamma_d,
              "gamma_c": base.gamma_c, "gamma_sq": base.gamma_sq,
              "theta_sq": base.theta_sq}
    fields.update(names_values)
    return ModelParams(**fields)


def _sweep_cell(args) -> tuple:
    (params, controls, cutoff, grid, lp_tuple, variables) = args
    evaluator = _cached_evaluator(cutoff, grid, lp_tuple, variables)
    space = evaluator.space
    tracker = _CriterionTracker(evaluator, keep_state=False)
    try:
        integrate(vacuum_state(space), params, controls, space,
                  observer=tracker)
    except IntegrationError:
        return (math.nan, math.nan, math.nan, math.nan, _STATUS_FAILURE)
    row = tracker.rows[tracker.best_index]
    return (row[4], row[0], row[1], tracker.purities[tracker.best_index],
            tracker.status)


def _worker_count(config: SweepConfig) -> int:
    env = os.environ.get(WORKERS_ENV_VAR)
    if env is not None:
        count = int(env)
        if count < 1:
            raise ValueError(f"{WORKERS_ENV_VAR} must be >= 1, got {env}")
        return count
    return config.workers


def run_sweep(config: SweepConfig, outdir) -> SweepResult:
    """Evaluate the qualifier minimum on the 2D grid and write points CSV,
    boundary CSV, and a summary JSON. Cell failures are isolated: the cell
    gets status numerical-failure and the sweep continues."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    base = config.base
    v1, v2 = config.axis1.values, config.axis2.values

    # one shared quadrature grid covering the widest state in the sweep
    def axis_max(name, default):
        vals = [default]
        for ax in (config.axis1, config.axis2):
            if ax.name == name:
                vals.append(ax.maximum)
        return max(vals)

    alpha_max = 1j * math.sqrt(2.0 * axis_max("S", base.params.S))
    gamma_sq_max = axis_max("gamma_sq", base.params.gamma_sq)
    if base.grid_half_width is not None:
        grid = QuadratureGrid(half_width=base.grid_half_width,
                              step=base.grid_step)
    else:
        grid = default_grid(alpha_max, gamma_sq_max, base.grid_step)
    lp_tuple = tuple(base.lp_grid)

    jobs = []
    for x1 in v1:
        for x2 in v2:
            params = _cell_params(base.params,
                                  {config.axis1.name: float(x1),
                                   config.axis2.name: float(x2)})
            jobs.append((params, base.controls, base.cutoff, grid, lp_tuple,
                         base.variables))

    workers = _worker_count(config)
    if workers == 1:
        cells = [_sweep_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_sweep_cell, jobs, chunksize=1))

    shape = (v1.size, v2.size)
    c_min = np.array([c[0] for c in cells]).reshape(shape)
    t_min = np.array([c[1] for c in cells]).reshape(shape)
    lp_min = np.array([c[2] for c in cells]).reshape(shape)
    p_min = np.array([c[3] for c in cells]).reshape(shape)
    status = np.array([c[4] for c in cells], dtype="U20").reshape(shape)

    boundary = extract_boundary(v1, v2, c_min)

    stem = f"{config.tag}__{config.axis1.name}_{config.axis2.name}"
    points_name = f"{stem}.csv"
    header = (f"{config.axis1.name},{config.axis2.name},"
              "c_mec_min,time_at_min,lp_at_min,purity_at_min,status")
    with open(outdir / points_name, "w") as fh:
        fh.write(header + "\n")
        for i, x1 in enumerate(v1):
            for j, x2 in enumerate(v2):
                fh.write(",".join([
                    _fmt(x1), _fmt(x2), _fmt(c_min[i, j]), _fmt(t_min[i, j]),
                    _fmt(lp_min[i, j]), _fmt(p_min[i, j]), status[i, j]]) + "\n")
    boundary_name = f"{stem}_boundary.csv"
    _write_rows_csv(outdir / boundary_name,
                    f"{config.axis1.name},{config.axis2.name}", boundary)
    _write_json(outdir / f"{stem}_summary.json", {
        "tag": config.tag,
        "axis1": {"name": config.axis1.name, "min": config.axis1.minimum,
                  "max": config.axis1.maximum, "count": config.axis1.count},
        "axis2": {"name": config.axis2.name, "min": config.axis2.minimum,
                  "max": config.axis2.maximum, "count": config.axis2.count},
        "threshold": ENTANGLEMENT_THRESHOLD,
        "below_threshold_cells": int(np.sum(c_min < ENTANGLEMENT_THRESHOLD)),
        "statuses": {name: int(np.sum(status == name))
                     for name in (_STATUS_OK, _STATUS_HORIZON, _STATUS_FAILURE)},
        "points_csv": points_name,
        "boundary_csv": boundary_name,
        "quadrature_grid": {"half_width": grid.half_width, "step": grid.step},
        **{"base": _config_echo(base)},
    })
    return SweepResult(
        tag=config.tag, axis1_name=config.axis1.name,
        axis2_name=config.axis2.name, axis1_values=v1, axis2_values=v2,
        c_mec_min=c_min, time_at_min=t_min, lp_at_min=lp_min,
        purity_at_min=p_min, status=status, boundary=boundary,
    )


def run_squeezed_suite(config: SweepConfig, outdir) -> SweepResult:
    """Sweep with the squeezed-bath channel engaged.

    Requires gamma_sq to participate: either the base rate is positive or one
    axis sweeps it. Otherwise identical to run_sweep.
    """
    squeezed = (config.base.params.gamma_sq > 0.0
                or "gamma_sq" in (config.axis1.name, config.axis2.name))
    if not squeezed:
        raise ValueError("squeezed suite needs gamma_sq > 0 in the base "
                         "parameters or as a sweep axis")
    return run_sweep(config, outdir)


# ---------------------------------------------------------------------------
# boundary extraction


def _chain_segments(segments: list) -> np.ndarray:
    """Order crossing segments into polylines; concatenate deterministically."""
    if not segments:
        return np.zeros((0, 2))
    key = lambda p: (round(p[0], 9), round(p[1], 9))
    adjacency: dict = {}
    for a, b in segments:
        adjacency.setdefault(key(a), []).append((a, b))
        adjacency.setdefault(key(b), []).append((b, a))
    used = set()
    chains = []
    # open chains start at odd-degree nodes; closed loops at any remaining
    starts = sorted((k for k, v in adjacency.items() if len(v) % 2 == 1))
    all_nodes = sorted(adjacency)
    for start_pool in (starts, all_nodes):
        for start in start_pool:
            while True:
                nxt = next(((a, b) for a, b in adjacency[start]
                            if (key(a), key(b)) not in used), None)
                if nxt is None:
                    break
                chain = [nxt[0]]
                a, b = nxt
                while True:
                    used.add((key(a), key(b)))
                    used.add((key(b), key(a)))
                    chain.append(b)
                    step = next(((p, q) for p, q in adjacency[key(b)]
                                 if (key(p), key(q)) not in used), None)
                    if step is None:
                        break
                    a, b = step
                chains.append(chain)
    chains.sort(key=lambda ch: (key(ch[0]), len(ch)))
    points = [p for ch in chains for p in ch]
    out = np.array(points, dtype=np.float64).reshape(-1, 2)
    keep = np.ones(len(out), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(out, axis=0)) > 1e-12, axis=1)
    return out[keep]


def extract_boundary(axis1_values, axis2_values, values,
                     threshold: float = ENTANGLEMENT_THRESHOLD) -> np.ndarray:
    """Linear-interpolated threshold contour as an ordered (k, 2) polyline.

    Cells are split into four triangles around their mean-valued center, so
    every crossing is a unique linear interpolation with no saddle ambiguity.
    Cells containing non-finite values are skipped. Returns an empty array
    (with a RuntimeWarning) when the grid never crosses the threshold.
    """
    x = np.asarray(axis1_values, dtype=np.float64)
    y = np.asarray(axis2_values, dtype=np.float64)
    c = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size < 2 or y.size < 2:
        raise ValueError("boundary extraction needs two axes with >= 2 values")
    if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
        raise ValueError("axis values must be strictly increasing")
    if c.shape != (x.size, y.size):
        raise ValueError(f"values shape {c.shape} does not match the axes "
                         f"({x.size}, {y.size})")
    finite = np.isfinite(c)
    signs = c - threshold
    # a value exactly at the threshold counts as the detected side, so the
    # crossing lands on that grid point instead of vanishing
    signs = np.where(finite & (signs == 0.0), -1e-300, signs)
    below = finite & (signs < 0)
    above = finite & (signs > 0)
    if not below.any() or not above.any():
        warnings.warn("grid never crosses the threshold; boundary is empty",
                      RuntimeWarning, stacklevel=2)
        return np.zeros((0, 2))

    def crossing(p1, s1, p2, s2):
        t = s1 / (s1 - s2)
        return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))

    segments = []
    for i in range(x.size - 1):
        for j in range(y.size - 1):
            corners = [((x[i], y[j]), signs[i, j]),
                       ((x[i + 1], y[j]), signs[i + 1, j]),
                       ((x[i + 1], y[j + 1]), signs[i + 1, j + 1]),
                       ((x[i], y[j + 1]), signs[i, j + 1])]
            if not all(np.isfinite(s) for _, s in corners):
                continue
            center = ((x[i] + x[i + 1]) / 2.0, (y[j] + y[j + 1]) / 2.0)
            s_center = sum(s for _, s in corners) / 4.0
            for k in range(4):
                tri = [corners[k], corners[(k + 1) % 4], (center, s_center)]
                pts = []
                for (pa, sa), (pb, sb) in ((tri[0], tri[1]), (tri[1], tri[2]),
                                           (tri[2], tri[0])):
                    if sa * sb < 0.0:
                        pts.append(crossing(pa, sa, pb, sb))
                if len(pts) == 2:
                    segments.append((pts[0], pts[1]))
    return _chain_segments(segments)
