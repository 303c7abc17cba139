"""State diagnostics: purity, fidelity against pure targets, the best cat
fidelity one oscillator can reach on its own, and displaced-parity sections
of the joint Wigner function.

Sections are evaluated exactly per grid point: for each section coordinate a
displacement matrix is built by matrix exponential, conjugates the photon
parity, and the two-mode expectation reduces to one bilinear contraction of
the regrouped density matrix. Only the two physically informative planes
(both coordinates real, or both imaginary) are supported; the full
four-dimensional function is out of scope.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from dopocat.fock import (
    DensityMatrix,
    ModeSpace,
    StateVector,
    _coherent_amplitudes,
    cat_state,
)
from dopocat.lindblad import (
    IntegrationControls,
    ModelParams,
    integrate_single_mode,
    vacuum_state,
)

__all__ = [
    "DEFAULT_SECTION_STEP",
    "DISPLACEMENT_TOL",
    "FidelityReport",
    "WignerSection",
    "default_section_grid",
    "fidelity_to_pure",
    "max_cat_fidelity_single_mode",
    "purity",
    "wigner_section",
    "write_section_csv",
]

#: Largest tolerated deviation of the truncated displacement acting on vacuum
#: from the exact coherent amplitudes before a section warns about truncation.
DISPLACEMENT_TOL = 1e-6

#: Default spacing of section coordinates.
DEFAULT_SECTION_STEP = 0.1

_SECTION_MARGIN = 2.0
_DEFAULT_SINGLE_MODE_CUTOFF = 16
_PLANES = ("real", "imaginary")


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2), via the squared Frobenius norm of the hermitian matrix."""
    return float(np.vdot(rho.data, rho.data).real)


def fidelity_to_pure(rho: DensityMatrix, psi: StateVector) -> float:
    """Overlap <psi|rho|psi> of a (generally mixed) state with a pure target."""
    if rho.space != psi.space:
        raise ValueError("state and target live in different mode spaces")
    value = float(np.vdot(psi.data, rho.data @ psi.data).real)
    return max(value, 0.0)


@dataclass(frozen=True)
class FidelityReport:
    """Sampled fidelity trajectory with its maximum.

    ``max_fidelity`` is the largest sampled value and ``time_at_max`` the
    earliest sample time attaining it.
    """

    times: np.ndarray
    fidelities: np.ndarray
    max_fidelity: float
    time_at_max: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        f = np.asarray(self.fidelities, dtype=np.float64)
        if t.ndim != 1 or t.shape != f.shape or t.size == 0:
            raise ValueError("times and fidelities must be equal-length 1D arrays")
        if f.min() < 0.0 or f.max() > 1.0 + 1e-9:
            raise ValueError(f"fidelity outside [0, 1]: range [{f.min()}, {f.max()}]")
        t.flags.writeable = False
        f.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "fidelities", f)


def max_cat_fidelity_single_mode(
    params: ModelParams,
    controls: IntegrationControls,
    space: ModeSpace | None = None,
) -> FidelityReport:
    """Best fidelity to the steady cat that a single oscillator reaches.

    Evolves vacuum under the single-mode generator (the pair coupling plays
    no role here) and tracks the overlap with the even cat of amplitude
    i*sqrt(2 S / gamma_d) at every sample. Warns when the maximum sits at the
    final sample, because the true optimum then lies beyond the horizon.
    """
    if space is None:
        space = ModeSpace(_DEFAULT_SINGLE_MODE_CUTOFF)
    if space.n_modes != 1:
        raise ValueError("max_cat_fidelity_single_mode expects a single-mode space")
    alpha = 1j * math.sqrt(2.0 * params.S / params.gamma_d)
    target = cat_state(alpha, 1, space).data
    times: list[float] = []
    fids: list[float] = []

    def watch(t: float, rho: np.ndarray) -> None:
        times.append(t)
        fids.append(float(np.vdot(target, rho @ target).real))

    integrate_single_mode(vacuum_state(space), params, controls, space, observer=watch)
    f = np.clip(np.asarray(fids), 0.0, None)
    i = int(np.argmax(f))
    if i == f.size - 1:
        warnings.warn(
            "best cat fidelity sits at the final sample; extend t_final to "
            "resolve the true maximum",
            RuntimeWarning,
            stacklevel=2,
        )
    return FidelityReport(
        times=np.asarray(times),
        fidelities=f,
        max_fidelity=float(f[i]),
        time_at_max=float(times[i]),
    )


@dataclass(frozen=True)
class WignerSection:
    """Joint Wigner function on a two-dimensional section.

    ``values[i, j]`` is W at displacement coordinates ``points[i]`` for mode 1
    and ``points[j]`` for mode 2, both taken along the real axis
    (``plane="real"``) or the imaginary axis (``plane="imaginary"``).
    """

    plane: str
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.plane not in _PLANES:
            raise ValueError(f"plane must be one of {_PLANES}, got {self.plane!r}")
        pts = np.asarray(self.points, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("points must be a nonempty 1D array")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("points must be strictly increasing")
        if vals.shape != (pts.size, pts.size):
            raise ValueError(f"values shape {vals.shape} does not match the grid")
        if not np.all(np.isfinite(vals)):
            raise ValueError("section contains non-finite values")
        pts.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)


def default_section_grid(alpha: complex, step: float = DEFAULT_SECTION_STEP) -> np.ndarray:
    """Symmetric section coordinates covering lobes at |alpha| plus a margin.

    The grid always contains 0.0 exactly, so the central value is sampled.
    """
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    n = int(round((abs(alpha) + _SECTION_MARGIN) / step))
    return np.arange(-n, n + 1, dtype=np.float64) * step


def _displacement_defect(amax: float, cutoff: int) -> float:
    """Norm error of the truncated displacement acting on vacuum at |alpha|=amax."""
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=np.float64)), k=1)
    column = expm(amax * (a.T - a))[:, 0]
    exact, _tail = _coherent_amplitudes(amax, cutoff)
    return float(np.linalg.norm(column - exact))


def wigner_section(rho: DensityMatrix, plane: str, points) -> WignerSection:
    """Evaluate W(alpha1, alpha2) on a shared coordinate grid for both modes.

    W = (4/pi^2) Tr[rho K(alpha1) x K(alpha2)] with K(a) = D(a) P D(a)^dagger,
    D the matrix-exponential displacement and P the photon parity. Warns when
    the grid reaches displacements the truncated space cannot represent to
    DISPLACEMENT_TOL; pad the state to a larger cutoff to silence it.
    """
    if rho.space.n_modes != 2:
        raise ValueError("wigner_section expects a two-mode state")
    if plane not in _PLANES:
        raise ValueError(f"plane must be one of {_PLANES}, got {plane!r}")
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 1 or pts.size < 1:
        raise ValueError("points must be a nonempty 1D array")
    c = rho.space.cutoff
    amax = float(np.abs(pts).max())
    defect = _displacement_defect(amax, c)
    if defect > DISPLACEMENT_TOL:
        warnings.warn(
            f"section grid reaches |alpha|={amax:.3g} where the cutoff-{c} "
            f"displacement deviates by {defect:.1e}; pad the state to a larger "
            "cutoff for trustworthy values",
            RuntimeWarning,
            stacklevel=2,
        )
    lowering = np.diag(np.sqrt(np.arange(1, c, dtype=np.float64)), k=1)
    raising = lowering.T.copy()
    parity = (-1.0) ** np.arange(c)
    alphas = pts.astype(np.complex128) * (1j if plane == "imaginary" else 1.0)
    u = np.empty((pts.size, c * c), dtype=np.complex128)
    for i, al in enumerate(alphas):
        d = expm(al * raising - np.conj(al) * lowering)
        k = (d * parity) @ d.conj().T
        u[i] = k.T.ravel()
    regrouped = rho.data.reshape(c, c, c, c).transpose(0, 2, 1, 3).reshape(c * c, c * c)
    values = (4.0 / math.pi**2) * (u @ regrouped @ u.T).real
    return WignerSection(plane=plane, points=pts, values=values)


def write_section_csv(section: WignerSection, path) -> None:
    """coord1,coord2,value rows, one per grid point (same layout as distributions)."""
    xs = section.points
    with open(path, "w") as fh:
        fh.write("coord1,coord2,value\n")
        for i, x1 in enumerate(xs):
            row = section.values[i]
            for j, x2 in enumerate(xs):
                fh.write(f"{x1:.10g},{x2:.10g},{row[j]:.10g}\n")
