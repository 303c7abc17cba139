"""Entanglement certification through modular-variable statistics.

A quadrature value splits into an integer and a modular part,
``q = N * period + rest`` with ``rest in [0, period)``.  Periodic interference
structure concentrates collective modular coordinates, so the sum of two
collective variances — one modular, one integer — drops below a separable-state
bound exactly when cat-like entanglement is present:

    C = var(N_collective) + var(rest_collective / period) <= 0.1565.

Two collective variable sets are supported: ``even_parity`` pairs the total
modular position (x1 + x2 wrapped per mode) with the relative integer momentum,
``odd_parity`` pairs the relative modular position with the total integer
momentum.

All variances are computed from exact per-grid-cell integrals of the modular
decomposition (cells straddling a period boundary are handled analytically by
closed-form antiderivatives), with the joint density taken as its midpoint
value per cell.  Two equivalent routes exist: `evaluate_criterion` /
`optimize_lp` consume `JointDistribution` objects, while `CriterionEvaluator`
contracts the same moment tables directly against a number-state density
matrix, batched over a whole grid of momentum scales — the fast path for time
sweeps.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .fock import DensityMatrix, ModeSpace
from .lindblad import EvolutionTrace
from .quadrature import (
    VACUUM_WIDTHS,
    JointDistribution,
    QuadratureGrid,
    _check_coverage,
    _momentum_phase,
    _pair_table,
    hermite_wavefunction_table,
)

__all__ = [
    "DEFAULT_LP_GRID",
    "ENTANGLEMENT_THRESHOLD",
    "SINGLE_MODE_BOUND",
    "CriterionEvaluator",
    "CriterionRecord",
    "IntegerDistribution",
    "ModularHistogram",
    "ModularScales",
    "QualifierResult",
    "VariableSet",
    "collective_distributions",
    "evaluate_criterion",
    "modular_decompose",
    "modular_uncertainty",
    "optimize_lp",
    "qualifier_over_time",
]

#: Separable states keep the collective variance sum above this value.
ENTANGLEMENT_THRESHOLD = 0.1565
#: Single-mode additive bound: var(N) + var(rest/period) >= this, any state.
SINGLE_MODE_BOUND = ENTANGLEMENT_THRESHOLD / 2.0
#: Momentum scales scanned when optimizing the criterion.
DEFAULT_LP_GRID = np.linspace(2.0, 6.0, 201)
DEFAULT_LP_GRID.flags.writeable = False

_SCALE_PRODUCT_TOL = 1e-12


class VariableSet(str, Enum):
    """Which pair of collective variables the criterion uses."""

    EVEN_PARITY = "even_parity"  # total modular position, relative integer momentum
    ODD_PARITY = "odd_parity"    # relative modular position, total integer momentum

    @property
    def modular_sign(self) -> float:
        return 1.0 if self is VariableSet.EVEN_PARITY else -1.0

    @property
    def integer_sign(self) -> float:
        return -1.0 if self is VariableSet.EVEN_PARITY else 1.0


@dataclass(frozen=True)
class ModularScales:
    """Conjugate decomposition periods, constrained by l_x * l_p = 2 pi."""

    l_x: float
    l_p: float

    def __post_init__(self):
        if not (self.l_x > 0.0 and self.l_p > 0.0):
            raise ValueError("both periods must be positive")
        if abs(self.l_x * self.l_p - 2.0 * math.pi) > _SCALE_PRODUCT_TOL:
            raise ValueError(
                f"l_x * l_p = {self.l_x * self.l_p!r} must equal 2*pi "
                f"within {_SCALE_PRODUCT_TOL}"
            )

    @classmethod
    def from_momentum_scale(cls, l_p: float) -> "ModularScales":
        if not l_p > 0.0:
            raise ValueError("l_p must be positive")
        return cls(l_x=2.0 * math.pi / l_p, l_p=float(l_p))


@dataclass(frozen=True)
class CriterionRecord:
    """Criterion value at one momentum scale (and optionally one time)."""

    l_p: float
    var_modular: float
    var_integer: float
    c_mec: float
    entangled: bool
    time: float | None = None

    def __post_init__(self):
        if self.var_modular < 0.0 or self.var_integer < 0.0:
            raise ValueError("variances must be nonnegative")
        if self.c_mec != self.var_modular + self.var_integer:
            raise ValueError("c_mec must be exactly the sum of the two variances")


def _record(l_p: float, var_mod: float, var_int: float, time: float | None) -> CriterionRecord:
    var_mod = max(float(var_mod), 0.0)
    var_int = max(float(var_int), 0.0)
    c = var_mod + var_int
    return CriterionRecord(
        l_p=float(l_p), var_modular=var_mod, var_integer=var_int,
        c_mec=c, entangled=bool(c <= ENTANGLEMENT_THRESHOLD), time=time,
    )


@dataclass(frozen=True)
class ModularHistogram:
    """Binned distribution of the collective modular coordinate."""

    centers: np.ndarray
    weights: np.ndarray
    lower: float
    upper: float

    def __post_init__(self):
        self.centers.flags.writeable = False
        self.weights.flags.writeable = False

    def total(self) -> float:
        return float(self.weights.sum())

    def mean(self) -> float:
        return float(self.centers @ self.weights) / self.total()

    def variance(self) -> float:
        m = self.mean()
        return float(((self.centers - m) ** 2) @ self.weights) / self.total()


@dataclass(frozen=True)
class IntegerDistribution:
    """Probability weights of the collective integer variable."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False
        self.weights.flags.writeable = False

    def total(self) -> float:
        return float(self.weights.sum())

    def mean(self) -> float:
        return float(self.values @ self.weights) / self.total()

    def variance(self) -> float:
        m = self.mean()
        return float(((self.values - m) ** 2) @ self.weights) / self.total()


@dataclass(frozen=True)
class QualifierResult:
    """Minimum criterion value over a sampled evolution."""

    c_mec_min: float
    time_at_min: float
    lp_at_min: float
    records: tuple = field(default_factory=tuple)


def modular_decompose(value: float, period: float) -> tuple[int, float]:
    """Split value = N * period + rest with rest in [0, period)."""
    if not period > 0.0:
        raise ValueError("period must be positive")
    n = math.floor(value / period)
    rest = value - n * period
    # guard the floating edges so rest always lands in [0, period)
    if rest < 0.0:
        n -= 1
        rest += period
    elif rest >= period:
        n += 1
        rest -= period
    return n, rest


# ---------------------------------------------------------------------------
# Exact per-cell integrals of the decomposition.
#
# With n = floor(x/L) and r = x - n L, the antiderivatives below satisfy
# F'(x) = (x mod L)^j or floor(x/L)^j; cell integrals are differences of F at
# the cell edges, so period boundaries inside a cell need no case analysis.
# ---------------------------------------------------------------------------

def _floor_split(x: np.ndarray, period: float) -> tuple[np.ndarray, np.ndarray]:
    n = np.floor(x / period)
    return n, x - n * period


def _antider_rest1(x: np.ndarray, period: float) -> np.ndarray:
    n, r = _floor_split(x, period)
    return 0.5 * (n * period * period + r * r)


def _antider_rest2(x: np.ndarray, period: float) -> np.ndarray:
    n, r = _floor_split(x, period)
    return (n * period ** 3 + r ** 3) / 3.0


def _antider_int1(x: np.ndarray, period: float) -> np.ndarray:
    n, r = _floor_split(x, period)
    return 0.5 * period * n * (n - 1.0) + n * r


def _antider_int2(x: np.ndarray, period: float) -> np.ndarray:
    n, r = _floor_split(x, period)
    return period * (n - 1.0) * n * (2.0 * n - 1.0) / 6.0 + n * n * r


def _modular_cell_moments(grid: QuadratureGrid, period: float) -> tuple[np.ndarray, np.ndarray]:
    """First and second moments of the modular rest over each grid cell."""
    lo = grid.points - grid.step / 2.0
    hi = grid.points + grid.step / 2.0
    return (_antider_rest1(hi, period) - _antider_rest1(lo, period),
            _antider_rest2(hi, period) - _antider_rest2(lo, period))


def _integer_cell_moments(grid: QuadratureGrid, period: float) -> tuple[np.ndarray, np.ndarray]:
    """First and second moments of the integer part over each grid cell."""
    lo = grid.points - grid.step / 2.0
    hi = grid.points + grid.step / 2.0
    return (_antider_int1(hi, period) - _antider_int1(lo, period),
            _antider_int2(hi, period) - _antider_int2(lo, period))


def _axis_segments(grid: QuadratureGrid, period: float):
    """Split each grid cell at period boundaries.

    Returns (cell_index, integer_part, rest_at_segment_start, width) arrays;
    within a segment the integer part is constant and the rest advances
    linearly, so binning a segment is exact.  Requires period > step so a cell
    holds at most one boundary.
    """
    if not period > grid.step:
        raise ValueError(
            f"decomposition period {period} must exceed the grid step {grid.step}"
        )
    lo = grid.points - grid.step / 2.0
    hi = grid.points + grid.step / 2.0
    n_lo = np.floor(lo / period)
    n_hi = np.floor(hi / period)
    idx = np.arange(grid.n_points)

    first_w = np.minimum(hi, (n_lo + 1.0) * period) - lo
    seg_idx = [idx]
    seg_n = [n_lo]
    seg_rest = [lo - n_lo * period]
    seg_w = [first_w]

    split = n_hi > n_lo
    second_w = hi[split] - n_hi[split] * period
    keep = second_w > 0.0
    seg_idx.append(idx[split][keep])
    seg_n.append(n_hi[split][keep])
    seg_rest.append(np.zeros(int(keep.sum())))
    seg_w.append(second_w[keep])

    return (np.concatenate(seg_idx), np.concatenate(seg_n),
            np.concatenate(seg_rest), np.concatenate(seg_w))


# ---------------------------------------------------------------------------
# Distribution route.
# ---------------------------------------------------------------------------

def _require_kind(dist: JointDistribution, kind: str, name: str):
    if dist.kind != kind:
        raise ValueError(f"{name} must be a {kind} distribution, got {dist.kind!r}")


def _pair_variance(values: np.ndarray, grid: QuadratureGrid, m1: np.ndarray,
                   m2: np.ndarray, sign: float) -> float:
    """Variance of f(q1) + sign * f(q2) for cell-constant joint density,
    where m1/m2 are the exact per-cell integrals of f and f^2."""
    step = grid.step
    marg1 = values.sum(axis=1) * step
    marg2 = values.sum(axis=0) * step
    mass = float(marg1.sum()) * step
    e1_a = float(m1 @ marg1) / mass
    e1_b = float(m1 @ marg2) / mass
    e2_a = float(m2 @ marg1) / mass
    e2_b = float(m2 @ marg2) / mass
    cross = float(m1 @ values @ m1) / mass
    return e2_a + e2_b + 2.0 * sign * cross - (e1_a + sign * e1_b) ** 2


def evaluate_criterion(px: JointDistribution, pp: JointDistribution,
                       scales: ModularScales,
                       variables: VariableSet | str = VariableSet.EVEN_PARITY,
                       time: float | None = None) -> CriterionRecord:
    """Collective variance sum for one choice of decomposition scales."""
    variables = VariableSet(variables)
    _require_kind(px, "position", "px")
    _require_kind(pp, "momentum", "pp")
    s1, s2 = _modular_cell_moments(px.grid, scales.l_x)
    var_mod = _pair_variance(px.values, px.grid, s1, s2,
                             variables.modular_sign) / scales.l_x ** 2
    n1, n2 = _integer_cell_moments(pp.grid, scales.l_p)
    var_int = _pair_variance(pp.values, pp.grid, n1, n2, variables.integer_sign)
    return _record(scales.l_p, var_mod, var_int, time)


def optimize_lp(px: JointDistribution, pp: JointDistribution, lp_grid,
                variables: VariableSet | str = VariableSet.EVEN_PARITY,
                time: float | None = None) -> CriterionRecord:
    """Best criterion value over a grid of momentum scales (ties -> smaller l_p)."""
    lp_grid = np.asarray(lp_grid, dtype=float)
    if lp_grid.size == 0 or not np.all(lp_grid > 0.0):
        raise ValueError("lp_grid must be nonempty with positive entries")
    records = [evaluate_criterion(px, pp, ModularScales.from_momentum_scale(lp),
                                  variables, time) for lp in lp_grid]
    return _best_record(records)


def _best_record(records: list[CriterionRecord]) -> CriterionRecord:
    best = min(r.c_mec for r in records)
    return min((r for r in records if r.c_mec == best), key=lambda r: r.l_p)


def collective_distributions(px: JointDistribution, pp: JointDistribution,
                             scales: ModularScales,
                             variables: VariableSet | str = VariableSet.EVEN_PARITY,
                             n_bins: int = 200, subdivisions: int = 4,
                             ) -> tuple[ModularHistogram, IntegerDistribution]:
    """Distributions of the collective modular and integer variables.

    The modular coordinate is x1_rest + x2_rest on [0, 2 l_x) for the
    even-parity set (the sum is not wrapped again) and x1_rest - x2_rest on
    (-l_x, l_x) for the odd-parity set.  Cells are split exactly at period
    boundaries; `subdivisions` further refines segments before midpoint
    binning of the modular histogram.
    """
    variables = VariableSet(variables)
    _require_kind(px, "position", "px")
    _require_kind(pp, "momentum", "pp")
    if n_bins < 1 or subdivisions < 1:
        raise ValueError("n_bins and subdivisions must be >= 1")

    # modular histogram from the position data
    idx, _, rest, width = _axis_segments(px.grid, scales.l_x)
    k = subdivisions
    sub_w = np.repeat(width / k, k)
    offsets = (np.arange(k) + 0.5) / k
    sub_mid = (rest[:, None] + width[:, None] * offsets[None, :]).ravel()
    sub_idx = np.repeat(idx, k)
    coords = sub_mid[:, None] + variables.modular_sign * sub_mid[None, :]
    masses = px.values[np.ix_(sub_idx, sub_idx)] * np.outer(sub_w, sub_w)
    if variables is VariableSet.EVEN_PARITY:
        lower, upper = 0.0, 2.0 * scales.l_x
    else:
        lower, upper = -scales.l_x, scales.l_x
    edges = np.linspace(lower, upper, n_bins + 1)
    hist, _ = np.histogram(coords.ravel(), bins=edges, weights=masses.ravel())
    centers = 0.5 * (edges[:-1] + edges[1:])
    dist_modular = ModularHistogram(centers=centers, weights=hist,
                                    lower=lower, upper=upper)

    # integer distribution from the momentum data
    idx, npart, _, width = _axis_segments(pp.grid, scales.l_p)
    masses = pp.values[np.ix_(idx, idx)] * np.outer(width, width)
    coll = npart[:, None] + variables.integer_sign * npart[None, :]
    coll = coll.astype(np.int64)
    lo = int(coll.min())
    weights = np.bincount((coll - lo).ravel(), weights=masses.ravel())
    values = lo + np.arange(weights.size, dtype=np.int64)
    dist_integer = IntegerDistribution(values=values, weights=weights)
    return dist_modular, dist_integer


# ---------------------------------------------------------------------------
# Number-state route, batched over momentum scales.
# ---------------------------------------------------------------------------

class CriterionEvaluator:
    """Evaluates the criterion for two-mode density matrices directly in
    number-state space, batched over a grid of momentum scales.

    All decomposition moment tables are contracted with the oscillator
    wavefunction table once at construction; per state the cost is two small
    matrix products.  Produces the same numbers as `evaluate_criterion` on the
    corresponding joint distributions.
    """

    def __init__(self, space: ModeSpace, grid: QuadratureGrid, lp_grid=None,
                 variables: VariableSet | str = VariableSet.EVEN_PARITY):
        if space.n_modes != 2:
            raise ValueError("criterion evaluation needs a two-mode space")
        lp_grid = DEFAULT_LP_GRID if lp_grid is None else np.asarray(lp_grid, float)
        if lp_grid.size == 0 or not np.all(lp_grid > 0.0):
            raise ValueError("lp_grid must be nonempty with positive entries")
        self.space = space
        self.grid = grid
        self.variables = VariableSet(variables)
        self.lp_grid = lp_grid.copy()
        self.lp_grid.flags.writeable = False

        c = space.cutoff
        w = hermite_wavefunction_table(ModeSpace(c), grid)
        pair = _pair_table(c, grid)
        lx_grid = 2.0 * math.pi / lp_grid
        s1 = np.stack([_modular_cell_moments(grid, lx)[0] for lx in lx_grid])
        s2 = np.stack([_modular_cell_moments(grid, lx)[1] for lx in lx_grid])
        n1 = np.stack([_integer_cell_moments(grid, lp)[0] for lp in lp_grid])
        n2 = np.stack([_integer_cell_moments(grid, lp)[1] for lp in lp_grid])
        self._lx = lx_grid
        # pairwise cross-moment vectors in the doubled index (n, m)
        self._u_mod = pair @ s1.T
        self._u_int = pair @ n1.T
        # single-mode operators whose trace with a reduced state gives the
        # marginal moments; a0 gives the grid-truncated mass
        self._a_mod1 = np.einsum("ni,ki,mi->knm", w, s1, w, optimize=True)
        self._a_mod2 = np.einsum("ni,ki,mi->knm", w, s2, w, optimize=True)
        self._a_int1 = np.einsum("ni,ki,mi->knm", w, n1, w, optimize=True)
        self._a_int2 = np.einsum("ni,ki,mi->knm", w, n2, w, optimize=True)
        self._a0 = (w * grid.step) @ w.T

    def _as_array(self, rho) -> np.ndarray:
        arr = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, complex)
        d = self.space.dim
        if arr.shape != (d, d):
            raise ValueError(f"state must be {d}x{d} for this space, got {arr.shape}")
        return arr

    def _side_variances(self, arr: np.ndarray, momentum: bool) -> np.ndarray:
        c = self.space.cutoff
        _check_coverage(arr, c, self.grid, momentum)
        r4 = arr.reshape(c, c, c, c)
        red1 = np.einsum("akbk->ab", r4)
        red2 = np.einsum("kakb->ab", r4)
        r2 = np.ascontiguousarray(
            r4.transpose(0, 2, 1, 3).reshape(c * c, c * c).real)
        if momentum:
            u, a1, a2, sign = self._u_int, self._a_int1, self._a_int2, \
                self.variables.integer_sign
        else:
            u, a1, a2, sign = self._u_mod, self._a_mod1, self._a_mod2, \
                self.variables.modular_sign
        mass = float(np.einsum("nm,mn->", red1, self._a0).real)
        e1_a = np.einsum("knm,mn->k", a1, red1).real / mass
        e1_b = np.einsum("knm,mn->k", a1, red2).real / mass
        e2_a = np.einsum("knm,mn->k", a2, red1).real / mass
        e2_b = np.einsum("knm,mn->k", a2, red2).real / mass
        cross = np.einsum("ak,ak->k", u, r2 @ u) / mass
        return e2_a + e2_b + 2.0 * sign * cross - (e1_a + sign * e1_b) ** 2

    def variances(self, rho) -> tuple[np.ndarray, np.ndarray]:
        """(var_modular, var_integer) arrays over the momentum-scale grid."""
        arr = self._as_array(rho)
        var_mod = self._side_variances(arr, momentum=False) / self._lx ** 2
        var_int = self._side_variances(_momentum_phase(arr, self.space.cutoff),
                                       momentum=True)
        return np.maximum(var_mod, 0.0), np.maximum(var_int, 0.0)

    def records(self, rho, time: float | None = None) -> list[CriterionRecord]:
        var_mod, var_int = self.variances(rho)
        return [_record(lp, vm, vi, time)
                for lp, vm, vi in zip(self.lp_grid, var_mod, var_int)]

    def evaluate(self, rho, time: float | None = None) -> CriterionRecord:
        """Record with the smallest variance sum (ties -> smaller l_p)."""
        return _best_record(self.records(rho, time))


def qualifier_over_time(trace: EvolutionTrace, grid: QuadratureGrid,
                        lp_grid=None,
                        variables: VariableSet | str = VariableSet.EVEN_PARITY,
                        ) -> QualifierResult:
    """Scale-optimized criterion at every sampled time; reports the minimum.

    Warns when the minimum sits at the final sample, since the true minimum
    then likely lies beyond the integrated horizon.
    """
    if not trace.snapshots:
        raise ValueError("trace carries no snapshots; integrate with store_snapshots=True")
    evaluator = CriterionEvaluator(trace.snapshots[0].space, grid, lp_grid, variables)
    records = [evaluator.evaluate(rho, time=float(t))
               for t, rho in zip(trace.times, trace.snapshots, strict=True)]
    best = min(range(len(records)), key=lambda i: records[i].c_mec)
    if best == len(records) - 1:
        warnings.warn(
            "criterion minimum sits at the final sample; extend t_final to "
            "bracket the true minimum", RuntimeWarning, stacklevel=2)
    r = records[best]
    return QualifierResult(c_mec_min=r.c_mec, time_at_min=r.time,
                           lp_at_min=r.l_p, records=tuple(records))


def modular_uncertainty(rho: DensityMatrix, scales: ModularScales,
                        grid: QuadratureGrid | None = None) -> tuple[float, float]:
    """Single-mode (var(N_p), var(x_rest / l_x)) for one oscillator.

    Their sum obeys the additive bound >= 0.07825 for every state; the
    two-mode criterion threshold is twice this bound.
    """
    if rho.space.n_modes != 1:
        raise ValueError("modular_uncertainty expects a single-mode state")
    c = rho.space.cutoff
    arr = rho.data
    n = np.arange(c, dtype=float)
    occ = float((n * np.diagonal(arr).real).sum())
    a2 = float(np.sum(np.diagonal(arr, offset=-2) * np.sqrt((n[:-2] + 1) * (n[:-2] + 2))).real)
    if grid is None:
        spread = math.sqrt((2.0 * occ + 1.0) / 2.0 + abs(a2))
        half = max(8.0, spread + VACUUM_WIDTHS + 1.0)
        step = 0.05
        grid = QuadratureGrid(half_width=math.ceil(half / step) * step, step=step)
    w = hermite_wavefunction_table(rho.space, grid)

    def axis_variance(state: np.ndarray, moments, period: float, second: float) -> float:
        if grid.half_width < math.sqrt(max(second, 0.0)) + VACUUM_WIDTHS:
            raise ValueError(
                f"grid half-width {grid.half_width} does not cover the state "
                f"(needs >= {math.sqrt(max(second, 0.0)) + VACUUM_WIDTHS:.2f})")
        density = np.einsum("ni,nm,mi->i", w, state, w, optimize=True).real
        m1, m2 = moments(grid, period)
        mass = float(density.sum()) * grid.step
        e1 = float(m1 @ density) / mass
        e2 = float(m2 @ density) / mass
        return e2 - e1 * e1

    var_x = axis_variance(arr, _modular_cell_moments, scales.l_x,
                          (2.0 * occ + 1.0) / 2.0 + a2) / scales.l_x ** 2
    phase = (-1j) ** np.arange(c)
    arr_p = (phase[:, None] * arr) * phase.conj()[None, :]
    var_n = axis_variance(arr_p, _integer_cell_moments, scales.l_p,
                          (2.0 * occ + 1.0) / 2.0 - a2)
    return max(float(var_n), 0.0), max(float(var_x), 0.0)
