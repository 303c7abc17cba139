"""Joint quadrature distributions via Hermite-function tables.

Quadrature convention: x = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2),
so the vacuum has <x^2> = <p^2> = 1/2. Momentum distributions reuse the
position wavefunctions through the diagonal similarity rho -> D rho D^dag
with D = diag((-i)^(n1+n2)); the per-mode momentum wavefunctions are
phi_n(p) = (-i)^n psi_n(p), and the phases are carried by D rather than by
the (real) table so the same contraction serves both kinds.

Distributions are assembled with two matrix products against a cached
pair table psi_n(x) psi_m(x); that keeps the cost at O(d^2 * points)
instead of four nested index sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from dopocat.fock import DensityMatrix, ModeSpace

MAX_TABLE_CUTOFF = 200
NEGATIVE_TOL = 1e-9
NORM_HARD_TOL = 1e-3
VACUUM_WIDTHS = 6.0 / math.sqrt(2.0)  # six vacuum standard deviations


@dataclass(frozen=True)
class QuadratureGrid:
    """Symmetric midpoint grid: 2L/step cell centers at -L + (k + 1/2) step.

    The count is exactly 2L/step (no endpoint duplication); there is no
    point at the origin, and points come in exact +/- pairs.
    """

    half_width: float
    step: float = 0.05

    def __post_init__(self):
        if self.half_width <= 0 or self.step <= 0:
            raise ValueError("half_width and step must be positive")
        n = 2.0 * self.half_width / self.step
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            raise ValueError("2*half_width must be a positive multiple of step")

    @property
    def n_points(self) -> int:
        return int(round(2.0 * self.half_width / self.step))

    @cached_property
    def points(self) -> np.ndarray:
        n = self.n_points
        xs = (np.arange(n) - (n - 1) / 2.0) * self.step
        xs.flags.writeable = False
        return xs


def default_grid(alpha: complex, gamma_sq: float = 0.0, step: float = 0.05) -> QuadratureGrid:
    """Grid sized for a state with lobes at +/- sqrt(2)|alpha|: the larger of
    8 and sqrt(2)|alpha| + 6, widened by (e^gamma_sq - 1) when the bath
    anti-squeezes the momentum spread."""
    L = max(8.0, math.sqrt(2.0) * abs(alpha) + 6.0) + (math.exp(gamma_sq) - 1.0)
    L = math.ceil(L / step) * step
    return QuadratureGrid(half_width=L, step=step)


@lru_cache(maxsize=8)
def _cached_table(cutoff: int, grid: QuadratureGrid) -> np.ndarray:
    xs = grid.points
    w = np.zeros((cutoff, xs.size))
    w[0] = math.pi ** -0.25 * np.exp(-0.5 * xs * xs)
    if cutoff > 1:
        w[1] = math.sqrt(2.0) * xs * w[0]
    for n in range(2, cutoff):
        w[n] = xs * math.sqrt(2.0 / n) * w[n - 1] - math.sqrt((n - 1.0) / n) * w[n - 2]
    if not np.isfinite(w).all():
        raise RuntimeError(f"wavefunction recurrence overflowed at cutoff {cutoff}")
    w.flags.writeable = False
    return w


def hermite_wavefunction_table(space: ModeSpace, grid: QuadratureGrid) -> np.ndarray:
    """Table psi_n(x) of normalized oscillator eigenfunctions, shape
    (cutoff, points). Cached per (cutoff, grid) and returned read-only."""
    if space.cutoff > MAX_TABLE_CUTOFF:
        raise ValueError(f"cutoff {space.cutoff} beyond recurrence stability range {MAX_TABLE_CUTOFF}")
    return _cached_table(space.cutoff, grid)


@lru_cache(maxsize=4)
def _pair_table(cutoff: int, grid: QuadratureGrid) -> np.ndarray:
    w = _cached_table(cutoff, grid)
    pair = np.einsum("nx,mx->nmx", w, w).reshape(cutoff * cutoff, -1)
    pair.flags.writeable = False
    return pair


@dataclass(frozen=True)
class JointDistribution:
    grid: QuadratureGrid
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in ("position", "momentum"):
            raise ValueError(f"kind must be 'position' or 'momentum', got {self.kind!r}")
        v = self.values
        lowest = float(v.min())
        if lowest < -NEGATIVE_TOL:
            raise ValueError(f"distribution value {lowest:.3e} below -{NEGATIVE_TOL}")
        if lowest < 0.0:
            object.__setattr__(self, "values", np.where(v < 0.0, 0.0, v))
        norm = self.riemann_sum()
        if not abs(norm - 1.0) <= NORM_HARD_TOL:
            raise ValueError(
                f"distribution mass {norm!r} deviates from 1 beyond {NORM_HARD_TOL}; "
                "the grid is too small for this state"
            )
        self.values.flags.writeable = False

    def riemann_sum(self) -> float:
        return float(self.values.sum()) * self.grid.step ** 2


def _mode_second_moments(rho: np.ndarray, c: int, momentum: bool) -> tuple[float, float]:
    """<q_k^2> for both modes: (2<n_k> + 1)/2 +/- Re <a_k^2>."""
    r4 = rho.reshape(c, c, c, c)
    n = np.arange(c, dtype=float)
    s2 = np.sqrt(n[2:] * (n[2:] - 1.0))
    out = []
    sign = -1.0 if momentum else 1.0
    for mode in (1, 2):
        if mode == 1:
            diag = np.einsum("ajaj->a", r4).real
            a2 = np.einsum("ajbj,a->", r4[: c - 2, :, 2:, :], s2).real
        else:
            diag = np.einsum("jaja->a", r4).real
            a2 = np.einsum("jajb,a->", r4[:, : c - 2, :, 2:], s2).real
        out.append(float((2.0 * (n * diag).sum() + 1.0) / 2.0 + sign * a2))
    return out[0], out[1]


def _check_coverage(rho: np.ndarray, c: int, grid: QuadratureGrid, momentum: bool):
    m1, m2 = _mode_second_moments(rho, c, momentum)
    need = math.sqrt(max(m1, m2, 0.0)) + VACUUM_WIDTHS
    if grid.half_width < need:
        kind = "momentum" if momentum else "position"
        raise ValueError(
            f"grid half-width {grid.half_width} does not cover the state's {kind} "
            f"spread: needs >= {need:.2f} (rms amplitude plus six vacuum widths)"
        )


def _momentum_phase(rho: np.ndarray, c: int) -> np.ndarray:
    d = (-1j) ** (np.arange(c)[:, None] + np.arange(c)[None, :]).reshape(-1)
    return (d[:, None] * rho) * d.conj()[None, :]


def _joint(rho: DensityMatrix, grid: QuadratureGrid, kind: str) -> JointDistribution:
    space = rho.space
    if space.n_modes != 2:
        raise ValueError("joint distributions need a two-mode state")
    c = space.cutoff
    data = rho.data
    momentum = kind == "momentum"
    _check_coverage(data, c, grid, momentum)
    if momentum:
        data = _momentum_phase(data, c)
    # hermiticity makes the imaginary part of the quadratic form vanish
    # identically, so only the real part of rho enters the contraction
    r2 = np.ascontiguousarray(
        data.reshape(c, c, c, c).transpose(0, 2, 1, 3).reshape(c * c, c * c).real
    )
    pair = _pair_table(c, grid)
    values = pair.T @ (r2 @ pair)
    return JointDistribution(grid=grid, values=values, kind=kind)


def joint_position_distribution(rho: DensityMatrix, grid: QuadratureGrid) -> JointDistribution:
    """P(x1, x2) = <x1, x2| rho |x1, x2> sampled on the grid."""
    return _joint(rho, grid, "position")


def joint_momentum_distribution(rho: DensityMatrix, grid: QuadratureGrid) -> JointDistribution:
    """P(p1, p2) = <p1, p2| rho |p1, p2> sampled on the grid."""
    return _joint(rho, grid, "momentum")


def _single(rho: DensityMatrix, grid: QuadratureGrid, momentum: bool) -> np.ndarray:
    if rho.space.n_modes != 1:
        raise ValueError("expected a single-mode state")
    c = rho.space.cutoff
    data = rho.data
    if momentum:
        d = (-1j) ** np.arange(c)
        data = (d[:, None] * data) * d.conj()[None, :]
    w = _cached_table(c, grid)
    values = np.einsum("nx,nm,mx->x", w, data.real, w)
    return np.where(values < 0.0, 0.0, values)


def position_distribution(rho: DensityMatrix, grid: QuadratureGrid) -> np.ndarray:
    """Single-mode P(x) = <x| rho |x> sampled on the grid."""
    return _single(rho, grid, momentum=False)


def momentum_distribution(rho: DensityMatrix, grid: QuadratureGrid) -> np.ndarray:
    """Single-mode P(p) = <p| rho |p> sampled on the grid."""
    return _single(rho, grid, momentum=True)


def write_distribution_csv(dist: JointDistribution, path) -> None:
    """coord1,coord2,value rows, one per grid point."""
    xs = dist.grid.points
    with open(path, "w") as fh:
        fh.write("coord1,coord2,value\n")
        for i, x1 in enumerate(xs):
            row = dist.values[i]
            for j, x2 in enumerate(xs):
                fh.write(f"{x1:.10g},{x2:.10g},{row[j]:.10g}\n")
