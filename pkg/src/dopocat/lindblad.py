"""Master-equation model and fixed-step RK4 integrator.

Model: H = sum_k -i S [(a_k^dag)^2 - a_k^2] with three dissipation channels,
single-photon loss at gamma_s (optionally into a squeezed bath set by
gamma_sq, theta_sq), two-photon loss at gamma_d (jump a_k^2), and for two
modes a collective channel at gamma_c with jump a_1 - a_2 whose dark state is
the even entangled cat.

Two equivalent right-hand-side routes are kept on purpose: the readable
matrix route (`hamiltonian`, `dissipator`, `squeezed_single_photon_dissipator`,
`liouvillian_rhs`) used by tests and small probes, and a fused shift/weight
kernel route used by `integrate`. Tests pin the two against each other.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from dopocat import _kernels
from dopocat.fock import DensityMatrix, ModeSpace, Operator, StateVector, annihilation, embed


@dataclass(frozen=True)
class ModelParams:
    """Rates in units of the two-photon rate; gamma_d = 1 is the normalization."""

    S: float = 1.0
    gamma_s: float = 0.0
    gamma_d: float = 1.0
    gamma_c: float = 10.0
    gamma_sq: float = 0.0
    theta_sq: float = math.pi

    def __post_init__(self):
        for name in ("S", "gamma_s", "gamma_d", "gamma_c", "gamma_sq"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")

    def squeeze_occupancy(self) -> tuple[float, complex]:
        """(N, M) of the squeezed bath: N = sinh^2 r, M = sinh r cosh r e^{-i theta}."""
        r = self.gamma_sq
        n = math.sinh(r) ** 2
        m = math.sinh(r) * math.cosh(r) * np.exp(-1j * self.theta_sq)
        return n, complex(m)


@dataclass(frozen=True)
class IntegrationControls:
    dt: float = 2e-3
    t_final: float = 8.0
    sample_every: int = 25

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")


@dataclass
class EvolutionTrace:
    times: np.ndarray
    trace_errors: np.ndarray
    herm_errors: np.ndarray
    min_eigenvalues: np.ndarray
    snapshots: list = field(default_factory=list)
    final_state: DensityMatrix | None = None


class IntegrationError(RuntimeError):
    pass


TRACE_ABORT = 1e-6
EIG_ABORT = 1e-6


# ---------------------------------------------------------------------------
# readable matrix route


def hamiltonian(params: ModelParams, space: ModeSpace) -> Operator:
    """Pump Hamiltonian sum_k -i S [(a_k^dag)^2 - a_k^2]."""
    a = annihilation(ModeSpace(space.cutoff)).matrix
    h1 = -1j * params.S * (a.conj().T @ a.conj().T - a @ a)
    if space.n_modes == 1:
        return Operator(h1, space)
    eye = np.eye(space.cutoff)
    return Operator(np.kron(h1, eye) + np.kron(eye, h1), space)


def dissipator(gamma: float, jump, rho: np.ndarray) -> np.ndarray:
    """(gamma/2) (2 L rho L^dag - L^dag L rho - rho L^dag L)."""
    L = jump.matrix if isinstance(jump, Operator) else np.asarray(jump)
    Ld = L.conj().T
    LdL = Ld @ L
    return 0.5 * gamma * (2.0 * (L @ rho @ Ld) - LdL @ rho - rho @ LdL)


def _mode_lowering(space: ModeSpace) -> list[np.ndarray]:
    a = annihilation(ModeSpace(space.cutoff))
    if space.n_modes == 1:
        return [a.matrix]
    return [embed(a, 1, space).matrix, embed(a, 2, space).matrix]


def squeezed_single_photon_dissipator(rho: np.ndarray, params: ModelParams, space: ModeSpace) -> np.ndarray:
    """Single-photon loss into a squeezed bath; reduces to plain loss at gamma_sq = 0."""
    n, m = params.squeeze_occupancy()
    gs = params.gamma_s
    out = np.zeros_like(rho, dtype=np.complex128)
    for a in _mode_lowering(space):
        ad = a.conj().T
        out += (1.0 + n) * dissipator(gs, a, rho)
        out += n * dissipator(gs, ad, rho)
        # anomalous terms: -M (gamma_s/2)(2 a rho a - {a a, rho}) and its M* partner
        aa, adad = a @ a, ad @ ad
        t_low = 0.5 * gs * (2.0 * (a @ rho @ a) - aa @ rho - rho @ aa)
        t_rai = 0.5 * gs * (2.0 * (ad @ rho @ ad) - adad @ rho - rho @ adad)
        out += -m * t_low - np.conj(m) * t_rai
    return out


def liouvillian_rhs(rho: np.ndarray, params: ModelParams, space: ModeSpace) -> np.ndarray:
    """Full right-hand side of the master equation (matrix route)."""
    h = hamiltonian(params, space).matrix
    out = -1j * (h @ rho - rho @ h)
    lowering = _mode_lowering(space)
    if params.gamma_sq != 0.0:
        out += squeezed_single_photon_dissipator(rho, params, space)
    else:
        for a in lowering:
            out += dissipator(params.gamma_s, a, rho)
    for a in lowering:
        out += dissipator(params.gamma_d, a @ a, rho)
    if space.n_modes == 2:
        out += dissipator(params.gamma_c, lowering[0] - lowering[1], rho)
    return out


# ---------------------------------------------------------------------------
# kernel route


def _pattern(kind: str, c: int) -> tuple[int, np.ndarray]:
    """Shift and output-index weights of the elementary ladder actions.

    "low"  : a on the ket side  (or X^dag = a^dag applied from the right)
    "rai"  : a^dag on the ket side (or right-multiplication by a)
    "low2" / "rai2": the two-photon versions; "one": identity.
    Weights are zero where the truncated operator has no matrix element.
    """
    n = np.arange(c, dtype=float)
    if kind == "one":
        return 0, np.ones(c)
    if kind == "low":
        w = np.sqrt(n + 1.0)
        w[c - 1] = 0.0
        return 1, w
    if kind == "rai":
        return -1, np.sqrt(n)
    if kind == "low2":
        w = np.sqrt((n + 1.0) * (n + 2.0))
        w[c - 2 :] = 0.0
        return 2, w
    if kind == "rai2":
        return -2, np.sqrt(n * (n - 1.0))
    raise ValueError(kind)


class _Generator:
    """Precompiled term arrays for the kernel route. Input must be hermitian."""

    def __init__(self, params: ModelParams, space: ModeSpace):
        self.space = space
        c = space.cutoff
        two = space.n_modes == 2
        n_occ, m_an = params.squeeze_occupancy()
        gs, gd, gc, s_pump = params.gamma_s, params.gamma_d, params.gamma_c, params.S
        if not two:
            gc = 0.0

        nvec = np.arange(c, dtype=float)
        # effective single-photon diagonal: gs[(1+N) n + N (n+1)] per mode;
        # the truncated raising jump kills the top level, so its a a^dag
        # diagonal ends at zero (keeps the generator exactly trace-free)
        raise_occ = nvec + 1.0
        raise_occ[c - 1] = 0.0
        gs_diag = gs * ((1.0 + n_occ) * nvec + n_occ * raise_occ)
        d1 = -0.5 * (gs_diag + gd * nvec * (nvec - 1.0))

        terms: list[tuple[complex, tuple, tuple, tuple, tuple, np.ndarray | None]] = []
        one = _pattern("one", c)
        low = _pattern("low", c)
        rai = _pattern("rai", c)
        low2 = _pattern("low2", c)
        rai2 = _pattern("rai2", c)
        one_b = (0, np.ones(1))  # singleton axis for single-mode layout

        if two:
            ax2_one, ax4_one = one, one
        else:
            ax2_one, ax4_one = one_b, one_b

        def add(z, k1=one, k2=None, b1=one, b2=None, diag=None):
            k2 = ax2_one if k2 is None else k2
            b2 = ax4_one if b2 is None else b2
            if z != 0:
                terms.append((complex(z), k1, k2, b1, b2, diag))

        # G rho: diagonal of -i H - (1/2) sum L^dag L (+ anomalous anticommutators)
        if two:
            diag2 = d1[:, None] + d1[None, :] - 0.5 * gc * (nvec[:, None] + nvec[None, :])
        else:
            diag2 = d1[:, None] * np.ones((1, 1))
        add(1.0, diag=diag2)

        # ket-side two-photon shifts: -S (a^dag)^2 + S a^2 per mode,
        # merged with the anomalous-bath (gamma_s/2)(M a^2 + M* a^dag^2)
        z_low2 = s_pump + 0.5 * gs * m_an
        z_rai2 = -s_pump + 0.5 * gs * np.conj(m_an)
        add(z_low2, k1=low2)
        add(z_rai2, k1=rai2)
        if two:
            add(z_low2, k2=low2)
            add(z_rai2, k2=rai2)
            # collective-channel cross terms in G: +gamma_c/2 (a1^dag a2 + a2^dag a1)
            add(0.5 * gc, k1=rai, k2=low)
            add(0.5 * gc, k1=low, k2=rai)

        # jump terms; self-adjoint ones carry half weight (doubled by A + A^dag),
        # one member of each adjoint pair carries full weight
        z_keep = 0.5 * ((1.0 + n_occ) * gs + gc)
        add(z_keep, k1=low, b1=low)
        if two:
            add(z_keep, k2=low, b2=low)
            add(-gc, k1=low, b2=low)  # -gamma_c a1 rho a2^dag (+ h.c. via doubling)
        add(0.5 * gd, k1=low2, b1=low2)
        if two:
            add(0.5 * gd, k2=low2, b2=low2)
        if n_occ != 0.0:
            add(0.5 * n_occ * gs, k1=rai, b1=rai)
            if two:
                add(0.5 * n_occ * gs, k2=rai, b2=rai)
        if m_an != 0.0:
            add(-gs * m_an, k1=low, b1=rai)  # -gamma_s M a rho a (+ h.c. via doubling)
            if two:
                add(-gs * m_an, k2=low, b2=rai)

        c2 = c if two else 1
        self.shape4 = (c, c2, c, c2)

        def window(w):
            nz = np.nonzero(w)[0]
            if nz.size == 0:
                return 0, 0
            return int(nz.min()), int(nz.max()) + 1

        # terms whose bra side is the identity update whole contiguous
        # (m1, m2) planes and get a separate, faster kernel
        plane, generic = [], []
        for z, k1, k2, b1, b2, diag in terms:
            a12 = z * diag.astype(np.complex128) if diag is not None else \
                z * np.outer(k1[1], k2[1]).astype(np.complex128)
            kb = [window(k1[1]), window(k2[1])]
            if b1[0] == 0 and b2[0] == 0 and np.all(b1[1] == 1.0) and np.all(b2[1] == 1.0):
                plane.append((a12, (k1[0], k2[0]), kb))
            else:
                bb = [window(b1[1]), window(b2[1])]
                generic.append((a12, (k1[0], k2[0], b1[0], b2[0]), kb + bb, b1[1], b2[1]))

        npl = len(plane)
        self.p_a12re = np.zeros((npl, c, c2))
        self.p_a12im = np.zeros((npl, c, c2))
        self.p_shifts = np.zeros((npl, 2), dtype=np.int64)
        self.p_bounds = np.zeros((npl, 4), dtype=np.int64)
        for t, (a12, sh, kb) in enumerate(plane):
            self.p_a12re[t], self.p_a12im[t] = a12.real, a12.imag
            self.p_shifts[t] = sh
            self.p_bounds[t] = (*kb[0], *kb[1])

        ng = len(generic)
        self.a12re = np.zeros((ng, c, c2))
        self.a12im = np.zeros((ng, c, c2))
        self.w3 = np.zeros((ng, c))
        self.w4 = np.zeros((ng, c2))
        self.shifts = np.zeros((ng, 4), dtype=np.int64)
        self.bounds = np.zeros((ng, 8), dtype=np.int64)
        for t, (a12, sh, wins, w3, w4) in enumerate(generic):
            self.a12re[t], self.a12im[t] = a12.real, a12.imag
            self.w3[t], self.w4[t] = w3, w4
            self.shifts[t] = sh
            self.bounds[t] = tuple(x for win in wins for x in win)

    def apply_into(self, sre, sim, out_re, out_im, out2re, out2im):
        """out <- A rho + (A rho)^dagger for the stage source (sre, sim)."""
        sh3 = (self.shape4[0], self.shape4[1], self.shape4[2] * self.shape4[3])
        out_re.fill(0.0)
        out_im.fill(0.0)
        _kernels.apply_plane_terms(
            sre.reshape(sh3), sim.reshape(sh3),
            self.p_a12re, self.p_a12im, self.p_shifts, self.p_bounds,
            out_re.reshape(sh3), out_im.reshape(sh3),
        )
        _kernels.apply_terms(
            sre, sim,
            self.a12re, self.a12im, self.w3, self.w4, self.shifts, self.bounds,
            out_re, out_im,
        )
        out2re[:] = out2re + out2re.T
        out2im[:] = out2im - out2im.T


def kernel_rhs(rho: np.ndarray, params: ModelParams, space: ModeSpace) -> np.ndarray:
    """Kernel-route RHS for a hermitian rho; used for cross-checking."""
    gen = _Generator(params, space)
    sh4 = gen.shape4
    d = space.dim
    bre = np.ascontiguousarray(rho.real).reshape(sh4)
    bim = np.ascontiguousarray(rho.imag).reshape(sh4)
    ore = np.zeros(sh4)
    oim = np.zeros(sh4)
    gen.apply_into(bre, bim, ore, oim, ore.reshape(d, d), oim.reshape(d, d))
    return (ore + 1j * oim).reshape(d, d)


# ---------------------------------------------------------------------------
# integrator


def _integrate_arrays(rho0: np.ndarray, params: ModelParams, controls: IntegrationControls,
                      space: ModeSpace, observer=None, store_snapshots=False) -> EvolutionTrace:
    gen = _Generator(params, space)
    sh4 = gen.shape4
    d = space.dim
    dt = controls.dt
    n_steps = int(round(controls.t_final / dt))
    if abs(n_steps * dt - controls.t_final) > 1e-9 * max(1.0, controls.t_final):
        warnings.warn("t_final is not a multiple of dt; rounding the step count")

    rre = np.ascontiguousarray(rho0.real).reshape(sh4).copy()
    rim = np.ascontiguousarray(rho0.imag).reshape(sh4).copy()
    r2re, r2im = rre.reshape(d, d), rim.reshape(d, d)
    ks = [(np.zeros(sh4), np.zeros(sh4)) for _ in range(4)]
    k2d = [(kre.reshape(d, d), kim.reshape(d, d)) for kre, kim in ks]
    scre, scim = np.zeros(sh4), np.zeros(sh4)
    flat = lambda a: a.reshape(-1)
    rre_f, rim_f, scre_f, scim_f = flat(rre), flat(rim), flat(scre), flat(scim)

    times, tr_errs, h_errs, eig_mins = [], [], [], []
    snapshots = []

    def sample(step: int):
        t = step * dt
        rho_c = r2re + 1j * r2im
        lo = float(np.linalg.eigvalsh(rho_c).min())
        tr_err = abs(_kernels.trace_real(r2re) - 1.0)
        times.append(t)
        tr_errs.append(tr_err)
        h_errs.append(float(np.abs(rho_c - rho_c.conj().T).max()))
        eig_mins.append(lo)
        # inverted comparison so NaN fails too
        if not lo >= -EIG_ABORT:
            raise IntegrationError(
                f"negative eigenvalue {lo:.3e} at t={t:.4f}; reduce dt or raise the cutoff"
            )
        if observer is not None:
            observer(t, rho_c)
        if store_snapshots:
            # integrator abort thresholds, not the strict construction ones:
            # transient truncation negativity up to EIG_ABORT is acceptable here
            snapshots.append(DensityMatrix(rho_c, space, trace_tol=TRACE_ABORT, eig_tol=EIG_ABORT))

    sample(0)
    h6 = dt / 6.0
    for step in range(1, n_steps + 1):
        (k1re, k1im), (k2re, k2im), (k3re, k3im), (k4re, k4im) = ks
        gen.apply_into(rre, rim, k1re, k1im, *k2d[0])
        _kernels.stage_src(rre_f, rim_f, flat(k1re), flat(k1im), 0.5 * dt, scre_f, scim_f)
        gen.apply_into(scre, scim, k2re, k2im, *k2d[1])
        _kernels.stage_src(rre_f, rim_f, flat(k2re), flat(k2im), 0.5 * dt, scre_f, scim_f)
        gen.apply_into(scre, scim, k3re, k3im, *k2d[2])
        _kernels.stage_src(rre_f, rim_f, flat(k3re), flat(k3im), dt, scre_f, scim_f)
        gen.apply_into(scre, scim, k4re, k4im, *k2d[3])
        _kernels.rk4_combine(rre_f, flat(k1re), flat(k2re), flat(k3re), flat(k4re), h6)
        _kernels.rk4_combine(rim_f, flat(k1im), flat(k2im), flat(k3im), flat(k4im), h6)
        # the update preserves hermiticity exactly (each stage is X + X^dagger),
        # so no per-step re-symmetrization; the residual is recorded at samples
        tr = _kernels.trace_real(r2re)
        # inverted comparison so NaN fails too
        if not abs(tr - 1.0) <= TRACE_ABORT:
            raise IntegrationError(
                f"trace drift {tr - 1.0:.3e} at step {step}; reduce dt or raise the cutoff"
            )
        if step % controls.sample_every == 0 or step == n_steps:
            sample(step)

    trace = EvolutionTrace(
        times=np.asarray(times),
        trace_errors=np.asarray(tr_errs),
        herm_errors=np.asarray(h_errs),
        min_eigenvalues=np.asarray(eig_mins),
        snapshots=snapshots,
    )
    trace.final_state = DensityMatrix(r2re + 1j * r2im, space,
                                      trace_tol=TRACE_ABORT, eig_tol=EIG_ABORT)
    return trace


def _as_density(state, space: ModeSpace) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.data
    if isinstance(state, StateVector):
        return np.outer(state.data, state.data.conj())
    arr = np.asarray(state, dtype=np.complex128)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    return arr


def vacuum_state(space: ModeSpace) -> DensityMatrix:
    rho = np.zeros((space.dim, space.dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    return DensityMatrix(rho, space)


def integrate(rho0, params: ModelParams, controls: IntegrationControls, space: ModeSpace,
              observer=None, store_snapshots=False) -> EvolutionTrace:
    """Propagate the two-mode (or single-mode) master equation with fixed-step RK4.

    Aborts with IntegrationError if |Tr rho - 1| > 1e-6 at any step or the
    smallest eigenvalue at a sample drops below -1e-6. The observer, when
    given, is called as observer(t, rho) at every sample.
    """
    rho = _as_density(rho0, space)
    if rho.shape != (space.dim, space.dim):
        raise ValueError("initial state does not match the mode space")
    return _integrate_arrays(rho, params, controls, space, observer, store_snapshots)


def integrate_single_mode(state0, params: ModelParams, controls: IntegrationControls,
                          space: ModeSpace, observer=None, store_snapshots=False) -> EvolutionTrace:
    """Single-oscillator version: same generator with the collective channel absent."""
    if space.n_modes != 1:
        raise ValueError("integrate_single_mode expects a single-mode space")
    return integrate(state0, params, controls, space, observer, store_snapshots)
