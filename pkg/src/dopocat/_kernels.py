"""Numba kernels for the master-equation right-hand side and the RK4 update.

The density matrix is split into real/imag float64 arrays viewed as
(c1, c2, c1, c2): ket indices (n1, n2) then bra indices (m1, m2); single-mode
states use singleton n2/m2 axes. Each generator term is a shifted read with
per-axis weights: out[i,j,k,l] += a12[t,i,j] * w3[t,k] * w4[t,l] *
src[i+s1, j+s2, k+s3, l+s4]. The RK4 stage source src = base + coef * kprev
is materialized once per stage by `stage_src`; apply_terms then streams a
single array.

The kernels compute A = G rho + (half-weighted self-adjoint jump terms) +
(one member of each mutually adjoint term pair at full weight); the caller
doubles it to A + A^dagger, which equals the full Lindblad RHS for hermitian
input.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def stage_src(bre, bim, kre, kim, coef, sre, sim):
    n = bre.size
    for i in range(n):
        sre[i] = bre[i] + coef * kre[i]
        sim[i] = bim[i] + coef * kim[i]
    return


@njit(cache=True, fastmath=True)
def apply_plane_terms(sre3, sim3, a12re, a12im, shifts, bounds, out_re3, out_im3):
    """Terms whose bra side is the identity: accumulate whole contiguous
    (m1, m2) planes scaled by the complex ket coefficient. Views are
    (c1, c2, c1*c2); out is accumulated, not zeroed."""
    nt = shifts.shape[0]
    m = sre3.shape[2]
    for t in range(nt):
        s1 = shifts[t, 0]
        s2 = shifts[t, 1]
        for i in range(bounds[t, 0], bounds[t, 1]):
            for j in range(bounds[t, 2], bounds[t, 3]):
                are = a12re[t, i, j]
                aim = a12im[t, i, j]
                if are == 0.0 and aim == 0.0:
                    continue
                srow = sre3[i + s1, j + s2]
                sirow = sim3[i + s1, j + s2]
                orow = out_re3[i, j]
                oirow = out_im3[i, j]
                if aim == 0.0:
                    for l in range(m):
                        orow[l] += are * srow[l]
                        oirow[l] += are * sirow[l]
                else:
                    for l in range(m):
                        orow[l] += are * srow[l] - aim * sirow[l]
                        oirow[l] += are * sirow[l] + aim * srow[l]
    return


@njit(cache=True, fastmath=True)
def apply_terms(sre, sim, a12re, a12im, w3, w4, shifts, bounds, out_re, out_im):
    """Generic shifted-weighted terms; out is accumulated, not zeroed."""
    nt = shifts.shape[0]
    for t in range(nt):
        s1 = shifts[t, 0]
        s2 = shifts[t, 1]
        s3 = shifts[t, 2]
        s4 = shifts[t, 3]
        w4t = w4[t]
        for i in range(bounds[t, 0], bounds[t, 1]):
            ii = i + s1
            for j in range(bounds[t, 2], bounds[t, 3]):
                jj = j + s2
                are = a12re[t, i, j]
                aim = a12im[t, i, j]
                if are == 0.0 and aim == 0.0:
                    continue
                for k in range(bounds[t, 4], bounds[t, 5]):
                    kk = k + s3
                    w3k = w3[t, k]
                    zre = are * w3k
                    zim = aim * w3k
                    srow = sre[ii, jj, kk]
                    sirow = sim[ii, jj, kk]
                    orow = out_re[i, j, k]
                    oirow = out_im[i, j, k]
                    for l in range(bounds[t, 6], bounds[t, 7]):
                        ll = l + s4
                        wl = w4t[l]
                        vre = srow[ll]
                        vim = sirow[ll]
                        cre = zre * wl
                        cim = zim * wl
                        orow[l] += cre * vre - cim * vim
                        oirow[l] += cre * vim + cim * vre
    return


@njit(cache=True)
def rk4_combine(r, k1, k2, k3, k4, h6):
    """r += h/6 * (k1 + 2 k2 + 2 k3 + k4) on flat views."""
    n = r.size
    for i in range(n):
        r[i] += h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
    return


@njit(cache=True)
def trace_real(re2):
    s = 0.0
    for p in range(re2.shape[0]):
        s += re2[p, p]
    return s
