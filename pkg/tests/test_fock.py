"""State and operator constructors: frozen oracle values and invariants."""
import math

import numpy as np
import pytest

from dopocat.fock import (
    DensityMatrix,
    ModeSpace,
    StateVector,
    annihilation,
    cat_state,
    classical_mixture,
    coherent_state,
    embed,
    entangled_cat,
    product_state,
)

SP16 = ModeSpace(16)
SP2 = ModeSpace(16, 2)


def test_annihilation_matrix_elements():
    a = annihilation(SP16).matrix
    for n in range(1, 16):
        assert a[n - 1, n] == pytest.approx(math.sqrt(n))
    assert np.count_nonzero(a) == 15
    with pytest.raises(ValueError):
        annihilation(SP2)


def test_embed_mode_ordering():
    # mode 1 is the slow index: embed(a,1)|n1,n2> touches n1
    a = annihilation(SP16)
    a1 = embed(a, 1, SP2).matrix
    a2 = embed(a, 2, SP2).matrix
    c = 16
    v = np.zeros(c * c)
    v[3 * c + 5] = 1.0  # |3,5>
    w1 = a1 @ v
    assert w1[2 * c + 5] == pytest.approx(math.sqrt(3))
    w2 = a2 @ v
    assert w2[3 * c + 4] == pytest.approx(math.sqrt(5))
    # different modes commute, including against daggers
    assert np.abs(a1 @ a2 - a2 @ a1).max() < 1e-14
    assert np.abs(a1 @ a2.conj().T - a2.conj().T @ a1).max() < 1e-14


def test_coherent_overlap_oracle():
    # Fock-sum oracle: <-a|a> = sum_n conj((-a)^n) a^n / n! * e^{-|a|^2} = e^{-2|a|^2}
    alpha = 1j * math.sqrt(2)
    v = coherent_state(alpha, SP16)
    w = coherent_state(-alpha, SP16)
    got = w.overlap(v)
    series = sum(
        ((-alpha).conjugate() ** n * alpha**n / math.factorial(n)).real for n in range(16)
    ) * math.exp(-abs(alpha) ** 2)
    # renormalization of the truncated vectors shifts the value by O(tail) ~ 1e-11
    assert got.real == pytest.approx(series, abs=1e-9)
    assert got.real == pytest.approx(math.exp(-4.0), abs=1e-9)  # 0.018315638888734...
    assert abs(got.imag) < 1e-12


def test_coherent_is_eigenstate_and_mean_photon():
    alpha = 0.7 - 0.4j
    v = coherent_state(alpha, SP16).data
    a = annihilation(SP16).matrix
    resid = a @ v - alpha * v
    assert np.linalg.norm(resid) < 1e-7
    n_op = a.conj().T @ a
    assert np.vdot(v, n_op @ v).real == pytest.approx(abs(alpha) ** 2, abs=1e-7)


def test_coherent_tail_warning_and_error():
    with pytest.warns(UserWarning):
        coherent_state(1j * math.sqrt(2), ModeSpace(12))
    with pytest.raises(ValueError):
        coherent_state(3j, ModeSpace(16))


def test_cat_norm_oracle():
    # unnormalized norm^2 of |a> + |-a> is 2(1 + e^{-2|a|^2}) = 2(1+e^{-4}) at a=i sqrt(2)
    alpha = 1j * math.sqrt(2)
    vp = coherent_state(alpha, SP16).data
    vm = coherent_state(-alpha, SP16).data
    raw = vp + vm
    assert np.vdot(raw, raw).real == pytest.approx(2.0 * (1.0 + math.exp(-4.0)), abs=1e-9)
    cat = cat_state(alpha, +1, SP16)
    assert np.linalg.norm(cat.data) == pytest.approx(1.0, abs=1e-12)
    # parity structure: even cat has no odd Fock amplitudes
    assert np.abs(cat.data[1::2]).max() < 1e-14
    odd = cat_state(alpha, -1, SP16)
    assert np.abs(odd.data[0::2]).max() < 1e-14


def test_cat_zero_alpha_sign_minus_raises():
    with pytest.raises(ValueError):
        cat_state(0.0, -1, SP16)


def test_entangled_cat_structure():
    alpha = 1j * math.sqrt(2)
    even = entangled_cat(alpha, "even", SP2)
    odd = entangled_cat(alpha, "odd", SP2)
    # both live on even total photon number
    c = 16
    idx = np.arange(c * c)
    tot = idx // c + idx % c
    assert np.abs(even.data[tot % 2 == 1]).max() < 1e-14
    assert np.abs(odd.data[tot % 2 == 1]).max() < 1e-14
    # <even|odd> = 2 e^{-2|a|^2} / (1 + e^{-4|a|^2}), derived from 4 coherent overlaps
    ov = even.overlap(odd)
    expect = 2.0 * math.exp(-4.0) / (1.0 + math.exp(-8.0))
    assert ov.real == pytest.approx(expect, abs=1e-9)
    # even state at alpha=0 degenerates to |0,0>, odd to |0,0> as well (both fine)
    e0 = entangled_cat(0.0, "even", SP2)
    assert abs(e0.data[0]) == pytest.approx(1.0)
    # sign=-1 with alpha=0 has vanishing norm
    with pytest.raises(ValueError):
        entangled_cat(0.0, "even", SP2, sign=-1)


def test_entangled_cat_dark_state():
    # (a1 - a2) |even> = 0; needs a cutoff with negligible coherent tail
    for alpha, cutoff in ((1j, 30), (1j * math.sqrt(2), 36), (3j, 64)):
        sp1 = ModeSpace(cutoff)
        sp2 = ModeSpace(cutoff, 2)
        even = entangled_cat(alpha, "even", sp2)
        a = annihilation(sp1)
        diff = embed(a, 1, sp2).matrix - embed(a, 2, sp2).matrix
        assert np.linalg.norm(diff @ even.data) < 1e-12


def test_joint_parity_eigenstates():
    # both even and odd (sign=+1) entangled cats are +1 eigenstates of joint parity;
    # sign=-1 on the even configuration flips it to -1
    alpha = 1j * math.sqrt(2)
    c = 16
    par = np.kron(np.diag((-1.0) ** np.arange(c)), np.diag((-1.0) ** np.arange(c)))
    for parity in ("even", "odd"):
        v = entangled_cat(alpha, parity, SP2).data
        assert np.vdot(v, par @ v).real == pytest.approx(1.0, abs=1e-12)
    vm = entangled_cat(alpha, "even", SP2, sign=-1).data
    assert np.vdot(vm, par @ vm).real == pytest.approx(-1.0, abs=1e-12)


def test_classical_mixture_trace_and_purity():
    alpha = 3j
    sp = ModeSpace(40, 2)
    rho = classical_mixture(alpha, sp).data
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    purity = np.vdot(rho, rho).real
    # 0.5 * (1 + |<a,a|-a,-a>|^2) with |<a|-a>|^2 = e^{-4|a|^2} per mode
    assert purity == pytest.approx(0.5 * (1.0 + math.exp(-8.0 * 9.0)), abs=1e-10)


def test_product_state():
    v = coherent_state(0.5, SP16)
    w = coherent_state(-0.5j, SP16)
    p = product_state(v, w, SP2)
    assert np.abs(p.data - np.kron(v.data, w.data)).max() < 1e-15


def test_state_vector_validation():
    with pytest.raises(ValueError):
        StateVector(np.ones(16), SP16)  # norm 4
    with pytest.raises(ValueError):
        StateVector(np.zeros(16), SP16)


def test_density_matrix_validation():
    d = SP16.dim
    m = np.zeros((d, d), dtype=complex)
    m[0, 0] = 1.0
    DensityMatrix(m, SP16)
    bad = m.copy()
    bad[0, 1] = 0.5  # not hermitian
    with pytest.raises(ValueError):
        DensityMatrix(bad, SP16)
    with pytest.raises(ValueError):
        DensityMatrix(2.0 * m, SP16)  # trace 2
    neg = m.copy()
    neg[1, 1] = -1e-6
    neg[0, 0] = 1.0 + 1e-6
    with pytest.raises(ValueError):
        DensityMatrix(neg, SP16)
