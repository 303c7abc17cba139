"""Command-line front-end.

Subcommands:
  run             one configured run -> timeseries/summary artifacts
  sweep           2D parameter sweep -> points/boundary/summary artifacts
  squeezed-sweep  sweep with the squeezed-bath channel engaged
  analyze         purity and Wigner sections from a saved state snapshot
  boundary        threshold boundary from an existing points CSV

Exit codes: 0 success, 1 integration failure (error JSON written),
2 configuration or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from dopocat.analysis import wigner_section, write_section_csv
from dopocat.fock import ModeSpace, pad_state
from dopocat.lindblad import IntegrationError
from dopocat.modular import ENTANGLEMENT_THRESHOLD
from dopocat.sweep import (
    _check_tag,
    _wigner_pad_cutoff,
    _write_json,
    _write_rows_csv,
    extract_boundary,
    load_run_config,
    load_sweep_config,
    read_snapshot,
    run_single,
    run_squeezed_suite,
    run_sweep,
)

__all__ = ["main"]


def _fail_usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _cmd_run(args) -> int:
    try:
        config = load_run_config(args.config)
    except (ValueError, TypeError, KeyError, OSError, json.JSONDecodeError) as e:
        return _fail_usage(f"invalid run configuration: {e}")
    try:
        summary = run_single(config, args.outdir)
    except IntegrationError as e:
        outdir = Path(args.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        _write_json(outdir / f"{config.tag}__error.json", {
            "tag": config.tag,
            "error": "integration-failure",
            "message": str(e),
        })
        print(f"error: integration failed: {e}", file=sys.stderr)
        return 1
    print(f"{config.tag}: status={summary['status']}", end="")
    if config.mode == "coupled":
        print(f" c_mec_min={summary['c_mec_min']:.6g}"
              f" entangled={summary['entangled']}")
    else:
        print(f" max_fidelity={summary['max_fidelity']:.6g}")
    return 0


def _cmd_sweep(args, runner) -> int:
    try:
        config = load_sweep_config(args.config)
    except (ValueError, TypeError, KeyError, OSError, json.JSONDecodeError) as e:
        return _fail_usage(f"invalid sweep configuration: {e}")
    try:
        result = runner(config, args.outdir)
    except ValueError as e:
        return _fail_usage(str(e))
    failures = int(np.sum(result.status == "numerical-failure"))
    print(f"{config.tag}: {result.c_mec_min.size} points, "
          f"{result.below_threshold_count()} below threshold, "
          f"{failures} failed, boundary points: {len(result.boundary)}")
    return 0


def _mean_photon_per_mode(rho) -> list[float]:
    c = rho.space.cutoff
    occupations = np.arange(c, dtype=np.float64)
    if rho.space.n_modes == 1:
        return [float(np.diag(rho.data).real @ occupations)]
    joint = np.einsum("nmnm->nm", rho.data.reshape(c, c, c, c)).real
    return [float(joint.sum(axis=1) @ occupations),
            float(joint.sum(axis=0) @ occupations)]


def _cmd_analyze(args) -> int:
    try:
        rho = read_snapshot(args.snapshot)
    except (ValueError, OSError) as e:
        return _fail_usage(f"cannot read snapshot: {e}")
    stem = Path(args.snapshot).stem
    tag = args.tag or (stem[:-7] if stem.endswith("__state") else stem)
    try:
        _check_tag(tag)
    except ValueError as e:
        return _fail_usage(str(e))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    mean_photon = _mean_photon_per_mode(rho)
    payload = {
        "tag": tag,
        "n_modes": rho.space.n_modes,
        "cutoff": rho.space.cutoff,
        "purity": float(np.vdot(rho.data, rho.data).real),
        "mean_photon": mean_photon,
        "artifacts": [f"{tag}__analysis.json"],
    }
    if rho.space.n_modes == 2:
        half_width = args.half_width
        if half_width is None:
            half_width = float(np.sqrt(max(*mean_photon, 0.0))) + 2.0
        if half_width <= 0:
            return _fail_usage("--half-width must be positive")
        n = max(1, int(round(half_width / 0.1)))
        grid = np.arange(-n, n + 1) * 0.1
        pad = _wigner_pad_cutoff(float(np.abs(grid).max()), rho.space.cutoff)
        state = rho if pad == rho.space.cutoff else pad_state(
            rho, ModeSpace(pad, 2))
        for plane in ("real", "imaginary"):
            section = wigner_section(state, plane, grid)
            name = f"{tag}__wigner_{plane}.csv"
            write_section_csv(section, outdir / name)
            payload["artifacts"].append(name)
    payload["artifacts"] = sorted(payload["artifacts"])
    _write_json(outdir / f"{tag}__analysis.json", payload)
    print(f"{tag}: purity={payload['purity']:.6g} "
          f"mean_photon={[round(v, 4) for v in mean_photon]}")
    return 0


def _cmd_boundary(args) -> int:
    path = Path(args.points)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as e:
        return _fail_usage(f"cannot read points CSV: {e}")
    if not header or len(header) < 3 or header[2] != "c_mec_min":
        return _fail_usage(
            "points CSV must have a header starting axis1,axis2,c_mec_min")
    if not rows:
        return _fail_usage("points CSV has no data rows")
    try:
        x1 = np.array([float(r[0]) for r in rows])
        x2 = np.array([float(r[1]) for r in rows])
        c = np.array([float(r[2]) for r in rows])
    except (ValueError, IndexError) as e:
        return _fail_usage(f"malformed points CSV: {e}")
    v1, v2 = np.unique(x1), np.unique(x2)
    if v1.size * v2.size != len(rows):
        return _fail_usage(
            f"points do not form a complete grid: {v1.size} x {v2.size} "
            f"axis values but {len(rows)} rows")
    grid = np.full((v1.size, v2.size), np.nan)
    grid[np.searchsorted(v1, x1), np.searchsorted(v2, x2)] = c
    boundary = extract_boundary(v1, v2, grid, threshold=args.threshold)
    name1, name2 = header[0], header[1]
    out = Path(args.outdir) / f"{path.stem}_boundary.csv"
    Path(args.outdir).mkdir(parents=True, exist_ok=True)
    _write_rows_csv(out, f"{name1},{name2}", boundary)
    print(f"{out.name}: {len(boundary)} boundary points")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dopocat",
        description="Coupled-oscillator entanglement runs, sweeps, and "
                    "state diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one configured run")
    p.add_argument("config", help="run configuration (JSON or TOML)")
    p.add_argument("-o", "--outdir", default=".", help="output directory")

    p = sub.add_parser("sweep", help="execute a 2D parameter sweep")
    p.add_argument("config", help="sweep configuration (JSON or TOML)")
    p.add_argument("-o", "--outdir", default=".", help="output directory")

    p = sub.add_parser("squeezed-sweep",
                       help="sweep with the squeezed-bath channel engaged")
    p.add_argument("config", help="sweep configuration (JSON or TOML)")
    p.add_argument("-o", "--outdir", default=".", help="output directory")

    p = sub.add_parser("analyze",
                       help="purity and Wigner sections from a snapshot")
    p.add_argument("snapshot", help="binary state snapshot")
    p.add_argument("-o", "--outdir", default=".", help="output directory")
    p.add_argument("--tag", default=None, help="artifact name prefix")
    p.add_argument("--half-width", type=float, default=None,
                   help="section grid half-width (default: from mean "
                        "photon number)")

    p = sub.add_parser("boundary",
                       help="threshold boundary from a points CSV")
    p.add_argument("points", help="sweep points CSV")
    p.add_argument("-o", "--outdir", default=".", help="output directory")
    p.add_argument("--threshold", type=float, default=ENTANGLEMENT_THRESHOLD,
                   help="qualifier threshold (default: %(default)s)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "sweep":
        return _cmd_sweep(args, run_sweep)
    if args.command == "squeezed-sweep":
        return _cmd_sweep(args, run_squeezed_suite)
    if args.command == "analyze":
        return _cmd_analyze(args)
    return _cmd_boundary(args)


if __name__ == "__main__":
    sys.exit(main())
