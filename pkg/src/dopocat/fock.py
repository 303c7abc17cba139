"""Truncated Fock-space primitives for one and two bosonic modes.

Two-mode arrays use mode 1 as the slow (outer) index throughout: the flat
index of |n1, n2> is n1 * cutoff + n2, i.e. embed(op, 1) == kron(op, eye).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

TAIL_WARN = 1e-8
TAIL_ERROR = 1e-4
NORM_TOL = 1e-10
HERM_TOL = 1e-9
TRACE_TOL = 1e-8
EIG_TOL = 1e-8


@dataclass(frozen=True)
class ModeSpace:
    """Truncated Hilbert space: `cutoff` Fock levels per mode, 1 or 2 modes."""

    cutoff: int
    n_modes: int = 1

    def __post_init__(self):
        if self.cutoff < 2:
            raise ValueError(f"cutoff must be >= 2, got {self.cutoff}")
        if self.n_modes not in (1, 2):
            raise ValueError(f"n_modes must be 1 or 2, got {self.n_modes}")

    @property
    def dim(self) -> int:
        return self.cutoff**self.n_modes


class Operator:
    """Matrix on a ModeSpace. Thin wrapper, no validation beyond shape."""

    def __init__(self, matrix, space: ModeSpace):
        m = np.asarray(matrix, dtype=np.complex128)
        if m.shape != (space.dim, space.dim):
            raise ValueError(f"operator shape {m.shape} does not match dim {space.dim}")
        self.matrix = m
        self.space = space

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.space)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.matrix @ other.matrix, self.space)
        return self.matrix @ np.asarray(other)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix - other.matrix, self.space)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix + other.matrix, self.space)


class StateVector:
    """Normalized pure state; rejects vectors off the unit sphere by > 1e-10."""

    def __init__(self, data, space: ModeSpace):
        v = np.asarray(data, dtype=np.complex128).reshape(-1)
        if v.shape != (space.dim,):
            raise ValueError(f"state length {v.shape[0]} does not match dim {space.dim}")
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {nrm!r} deviates from 1 beyond {NORM_TOL}")
        self.data = v
        self.space = space

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.data, other.data))


class DensityMatrix:
    """Physical density matrix: hermitian, unit trace, positive within tolerance."""

    def __init__(self, data, space: ModeSpace, *, trace_tol: float = TRACE_TOL,
                 eig_tol: float = EIG_TOL):
        m = np.asarray(data, dtype=np.complex128)
        if m.shape != (space.dim, space.dim):
            raise ValueError(f"shape {m.shape} does not match dim {space.dim}")
        herm = float(np.abs(m - m.conj().T).max())
        if herm > HERM_TOL:
            raise ValueError(f"hermiticity residue {herm:.3e} exceeds {HERM_TOL}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond {trace_tol}")
        lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if lo < -eig_tol:
            raise ValueError(f"negative eigenvalue {lo:.3e} below -{eig_tol}")
        self.data = m
        self.space = space

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        return cls(np.outer(psi.data, psi.data.conj()), psi.space)

    @classmethod
    def _trusted(cls, data: np.ndarray, space: ModeSpace) -> "DensityMatrix":
        # for internal transforms that preserve validity exactly (padding);
        # skips the O(dim^3) eigenvalue check
        self = object.__new__(cls)
        self.data = np.asarray(data, dtype=np.complex128)
        self.space = space
        return self


def annihilation(space: ModeSpace) -> Operator:
    """Single-mode lowering operator, <n-1|a|n> = sqrt(n). Use embed() for 2 modes."""
    if space.n_modes != 1:
        raise ValueError("annihilation is defined on a single mode; embed() it instead")
    c = space.cutoff
    return Operator(np.diag(np.sqrt(np.arange(1, c, dtype=float)), k=1), space)


def embed(op: Operator, mode: int, space: ModeSpace) -> Operator:
    """Lift a single-mode operator into a two-mode space (mode 1 = slow index)."""
    if space.n_modes != 2:
        raise ValueError("embed targets a two-mode space")
    if op.space.cutoff != space.cutoff:
        raise ValueError("cutoff mismatch between operator and target space")
    eye = np.eye(space.cutoff)
    if mode == 1:
        return Operator(np.kron(op.matrix, eye), space)
    if mode == 2:
        return Operator(np.kron(eye, op.matrix), space)
    raise ValueError(f"mode must be 1 or 2, got {mode}")


def _coherent_amplitudes(alpha: complex, cutoff: int) -> tuple[np.ndarray, float]:
    """Truncated coherent amplitudes and the lost tail mass (before renormalizing)."""
    v = np.zeros(cutoff, dtype=np.complex128)
    v[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, cutoff):
        v[n] = v[n - 1] * alpha / math.sqrt(n)
    tail = 1.0 - float(np.vdot(v, v).real)
    return v, tail


def _check_tail(tail: float, alpha: complex, cutoff: int):
    if tail > TAIL_ERROR:
        raise ValueError(
            f"coherent tail mass {tail:.3e} beyond cutoff {cutoff} for alpha={alpha}; "
            "increase the cutoff"
        )
    if tail > TAIL_WARN:
        warnings.warn(
            f"coherent tail mass {tail:.3e} beyond cutoff {cutoff} for alpha={alpha}",
            stacklevel=3,
        )


def _normalized(v: np.ndarray) -> np.ndarray:
    nrm = float(np.linalg.norm(v))
    if nrm < 1e-8:
        raise ValueError("state has vanishing norm for this alpha/sign combination")
    return v / nrm


def coherent_state(alpha: complex, space: ModeSpace) -> StateVector:
    """Truncated, renormalized coherent state |alpha> on a single mode.

    Warns when the truncated tail mass exceeds 1e-8 and raises beyond 1e-4,
    so downstream identities (eigenstate of a, mean photon number |alpha|^2)
    hold to the advertised tolerances.
    """
    if space.n_modes != 1:
        raise ValueError("coherent_state builds single-mode states; kron them yourself")
    v, tail = _coherent_amplitudes(alpha, space.cutoff)
    _check_tail(tail, alpha, space.cutoff)
    return StateVector(_normalized(v), space)


def cat_state(alpha: complex, sign: int, space: ModeSpace) -> StateVector:
    """Normalized (|alpha> + sign |-alpha>)/N on a single mode, sign in {+1, -1}."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if space.n_modes != 1:
        raise ValueError("cat_state builds single-mode states")
    vp, tp = _coherent_amplitudes(alpha, space.cutoff)
    vm, tm = _coherent_amplitudes(-alpha, space.cutoff)
    _check_tail(max(tp, tm), alpha, space.cutoff)
    return StateVector(_normalized(vp + sign * vm), space)


def product_state(a: StateVector, b: StateVector, space: ModeSpace) -> StateVector:
    """Two-mode product |a> x |b> (mode 1 slow index)."""
    if space.n_modes != 2:
        raise ValueError("product_state targets a two-mode space")
    return StateVector(np.kron(a.data, b.data), space)


def entangled_cat(alpha: complex, parity: str, space: ModeSpace, sign: int = 1) -> StateVector:
    """Two-mode entangled cat state.

    parity "even": (|alpha,alpha> + sign |-alpha,-alpha>)/N
    parity "odd":  (|alpha,-alpha> + sign |-alpha,alpha>)/N

    sign defaults to +1. With sign=-1 and parity "even" this is the diagonal cat
    with odd joint photon parity (negative joint-parity expectation), the state
    whose Wigner central disk goes negative.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if space.n_modes != 2:
        raise ValueError("entangled_cat targets a two-mode space")
    vp, tp = _coherent_amplitudes(alpha, space.cutoff)
    vm, tm = _coherent_amplitudes(-alpha, space.cutoff)
    _check_tail(max(tp, tm), alpha, space.cutoff)
    vp = _normalized(vp)
    vm = _normalized(vm)
    if parity == "even":
        v = np.kron(vp, vp) + sign * np.kron(vm, vm)
    else:
        v = np.kron(vp, vm) + sign * np.kron(vm, vp)
    return StateVector(_normalized(v), space)


def classical_mixture(alpha: complex, space: ModeSpace) -> DensityMatrix:
    """Equal incoherent mixture of |alpha,alpha> and |-alpha,-alpha>."""
    if space.n_modes != 2:
        raise ValueError("classical_mixture targets a two-mode space")
    vp, tp = _coherent_amplitudes(alpha, space.cutoff)
    vm, tm = _coherent_amplitudes(-alpha, space.cutoff)
    _check_tail(max(tp, tm), alpha, space.cutoff)
    vp = np.kron(_normalized(vp), _normalized(vp))
    vm = np.kron(_normalized(vm), _normalized(vm))
    rho = 0.5 * (np.outer(vp, vp.conj()) + np.outer(vm, vm.conj()))
    return DensityMatrix(rho, space)


def pad_state(state, space: ModeSpace):
    """Zero-pad a state into a larger-cutoff space with the same mode count.

    The embedding is exact (no renormalization), so expectation values are
    unchanged while operators built in the bigger space gain headroom.
    """
    if not isinstance(state, (StateVector, DensityMatrix)):
        raise TypeError("pad_state expects a StateVector or DensityMatrix")
    old = state.space
    if space.n_modes != old.n_modes:
        raise ValueError("pad_state keeps the mode count fixed")
    if space.cutoff < old.cutoff:
        raise ValueError(
            f"target cutoff {space.cutoff} is below the current {old.cutoff}")
    c, big = old.cutoff, space.cutoff
    if isinstance(state, StateVector):
        if old.n_modes == 1:
            v = np.zeros(big, dtype=np.complex128)
            v[:c] = state.data
        else:
            v2 = np.zeros((big, big), dtype=np.complex128)
            v2[:c, :c] = state.data.reshape(c, c)
            v = v2.reshape(-1)
        return StateVector(v, space)
    if isinstance(state, DensityMatrix):
        if old.n_modes == 1:
            m = np.zeros((big, big), dtype=np.complex128)
            m[:c, :c] = state.data
        else:
            m4 = np.zeros((big, big, big, big), dtype=np.complex128)
            m4[:c, :c, :c, :c] = state.data.reshape(c, c, c, c)
            m = m4.reshape(big * big, big * big)
        return DensityMatrix._trusted(m, space)


def partial_trace(rho: DensityMatrix, mode: int) -> DensityMatrix:
    """Reduced state of the kept mode (1 or 2) of a two-mode density matrix."""
    if rho.space.n_modes != 2:
        raise ValueError("partial_trace expects a two-mode state")
    c = rho.space.cutoff
    r4 = rho.data.reshape(c, c, c, c)
    if mode == 1:
        reduced = np.einsum("akbk->ab", r4)
    elif mode == 2:
        reduced = np.einsum("kakb->ab", r4)
    else:
        raise ValueError(f"mode must be 1 or 2, got {mode}")
    return DensityMatrix(reduced, ModeSpace(c))
