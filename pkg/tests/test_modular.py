"""Modular-variables criterion tests.

The reference oracle below recomputes every variance by explicit per-cell
period splitting in a plain Python loop — no shared code with the
antiderivative tables used by the package.
"""
import math
import warnings

import numpy as np
import pytest

from dopocat import (
    DEFAULT_LP_GRID,
    ENTANGLEMENT_THRESHOLD,
    SINGLE_MODE_BOUND,
    CriterionEvaluator,
    CriterionRecord,
    DensityMatrix,
    IntegrationControls,
    ModeSpace,
    ModelParams,
    ModularScales,
    QuadratureGrid,
    VariableSet,
    cat_state,
    classical_mixture,
    coherent_state,
    collective_distributions,
    default_grid,
    entangled_cat,
    evaluate_criterion,
    integrate,
    joint_momentum_distribution,
    joint_position_distribution,
    modular_decompose,
    modular_uncertainty,
    optimize_lp,
    product_state,
    qualifier_over_time,
    vacuum_state,
)

GRID = QuadratureGrid(half_width=8.0, step=0.05)
LP_CAT3 = 6.0 * math.sqrt(2.0)
IDEAL_CAT_VARIANCE = 1.0 / 6.0 - 1.0 / (2.0 * math.pi ** 2)  # full-contrast fringe


def reference_axis_moments(points, step, period, which):
    """Per-cell integrals of rest^j or N^j by explicit boundary walking."""
    m1 = np.zeros(points.size)
    m2 = np.zeros(points.size)
    for i, x in enumerate(points):
        lo, hi = x - step / 2.0, x + step / 2.0
        a = lo
        n = math.floor(a / period)
        while a < hi:
            b = min(hi, (n + 1) * period)
            if which == "modular":
                r0, r1 = a - n * period, b - n * period
                m1[i] += (r1 ** 2 - r0 ** 2) / 2.0
                m2[i] += (r1 ** 3 - r0 ** 3) / 3.0
            else:
                m1[i] += n * (b - a)
                m2[i] += n * n * (b - a)
            a = b
            n += 1
    return m1, m2


def reference_variances(px, pp, l_p, even=True):
    sm = 1.0 if even else -1.0
    si = -1.0 if even else 1.0
    out = []
    for dist, period, which, sign in [
            (px, 2.0 * math.pi / l_p, "modular", sm), (pp, l_p, "integer", si)]:
        g = dist.grid
        m1, m2 = reference_axis_moments(g.points, g.step, period, which)
        vals = dist.values
        mass = vals.sum() * g.step ** 2
        marg1 = vals.sum(axis=1) * g.step
        marg2 = vals.sum(axis=0) * g.step
        e1a, e1b = m1 @ marg1 / mass, m1 @ marg2 / mass
        e2a, e2b = m2 @ marg1 / mass, m2 @ marg2 / mass
        cross = m1 @ vals @ m1 / mass
        v = e2a + e2b + 2.0 * sign * cross - (e1a + sign * e1b) ** 2
        out.append(v / period ** 2 if which == "modular" else v)
    return out


def random_density(space, seed):
    rng = np.random.default_rng(seed)
    d = space.dim
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = m @ m.conj().T
    return DensityMatrix(rho / np.trace(rho).real, space)


@pytest.fixture(scope="module")
def cat3():
    space = ModeSpace(32, 2)
    rho = DensityMatrix.from_state(entangled_cat(3j, "even", space))
    grid = default_grid(3j)
    return (rho, grid, joint_position_distribution(rho, grid),
            joint_momentum_distribution(rho, grid))


def test_modular_decompose_examples():
    assert modular_decompose(3.7, 1.0) == (3, pytest.approx(0.7))
    assert modular_decompose(-0.2, 1.0) == (-1, pytest.approx(0.8))
    n, rest = modular_decompose(2.0 * math.pi, math.pi / 2.0)
    assert n == 4 and rest == 0.0
    with pytest.raises(ValueError):
        modular_decompose(1.0, 0.0)


def test_modular_decompose_reconstructs_grid_points():
    for period in (0.3, 1.0, math.pi / 2.0, 2.2):
        for x in GRID.points[::7]:
            n, rest = modular_decompose(float(x), period)
            assert 0.0 <= rest < period
            assert abs(n * period + rest - x) < 1e-12


def test_scales_validation():
    s = ModularScales.from_momentum_scale(4.0)
    assert abs(s.l_x * s.l_p - 2.0 * math.pi) < 1e-12
    with pytest.raises(ValueError):
        ModularScales(l_x=1.0, l_p=1.0)
    with pytest.raises(ValueError):
        ModularScales.from_momentum_scale(0.0)
    with pytest.raises(ValueError):
        ModularScales(l_x=-1.0, l_p=-2.0 * math.pi)


def test_criterion_record_invariants():
    with pytest.raises(ValueError):
        CriterionRecord(l_p=4.0, var_modular=-0.1, var_integer=0.1,
                        c_mec=0.0, entangled=True)
    with pytest.raises(ValueError):
        CriterionRecord(l_p=4.0, var_modular=0.1, var_integer=0.1,
                        c_mec=0.3, entangled=False)


def test_both_routes_match_the_reference_oracle():
    space = ModeSpace(6, 2)
    rho = random_density(space, seed=7)
    px = joint_position_distribution(rho, GRID)
    pp = joint_momentum_distribution(rho, GRID)
    for lp in (2.7, 4.0, 5.3):
        for variables, even in ((VariableSet.EVEN_PARITY, True),
                                (VariableSet.ODD_PARITY, False)):
            ref_mod, ref_int = reference_variances(px, pp, lp, even=even)
            rec = evaluate_criterion(px, pp, ModularScales.from_momentum_scale(lp),
                                     variables)
            assert abs(rec.var_modular - ref_mod) < 1e-12
            assert abs(rec.var_integer - ref_int) < 1e-12
            assert rec.c_mec == rec.var_modular + rec.var_integer
            vm, vi = CriterionEvaluator(space, GRID, [lp], variables).variances(rho)
            assert abs(vm[0] - ref_mod) < 1e-12
            assert abs(vi[0] - ref_int) < 1e-12


def test_even_cat_is_certified(cat3):
    _, _, px, pp = cat3
    rec = evaluate_criterion(px, pp, ModularScales.from_momentum_scale(LP_CAT3))
    assert rec.var_integer < 1e-6
    assert 0.112 < rec.var_modular < 0.122
    assert abs(rec.var_modular - IDEAL_CAT_VARIANCE) < 2e-3
    assert abs(rec.var_modular - 0.116166) < 5e-4
    assert rec.c_mec < ENTANGLEMENT_THRESHOLD
    assert rec.entangled


def test_odd_cat_with_odd_parity_variables():
    space = ModeSpace(32, 2)
    rho = DensityMatrix.from_state(entangled_cat(3j, "odd", space))
    grid = default_grid(3j)
    px = joint_position_distribution(rho, grid)
    pp = joint_momentum_distribution(rho, grid)
    rec = evaluate_criterion(px, pp, ModularScales.from_momentum_scale(LP_CAT3),
                             VariableSet.ODD_PARITY)
    assert rec.var_integer < 1e-6
    assert 0.112 < rec.var_modular < 0.122
    assert rec.entangled


def test_classical_mixture_is_not_detected():
    space = ModeSpace(32, 2)
    rho = classical_mixture(3j, space)
    grid = default_grid(3j)
    px = joint_position_distribution(rho, grid)
    pp = joint_momentum_distribution(rho, grid)
    rec = evaluate_criterion(px, pp, ModularScales.from_momentum_scale(LP_CAT3))
    assert abs(rec.var_modular - 1.0 / 6.0) < 1e-3
    assert rec.var_integer < 1e-6
    assert rec.c_mec > ENTANGLEMENT_THRESHOLD
    assert not rec.entangled
    # and no scanned scale detects it either
    vm, vi = CriterionEvaluator(space, grid).variances(rho)
    assert (vm + vi).min() > ENTANGLEMENT_THRESHOLD


def test_criterion_is_sound_on_separable_states():
    space = ModeSpace(16, 2)
    one = ModeSpace(16)
    evaluator = CriterionEvaluator(space, GRID)
    vac = vacuum_state(space)
    coh = DensityMatrix.from_state(product_state(
        coherent_state(1j * math.sqrt(2.0), one),
        coherent_state(1j * math.sqrt(2.0), one), space))
    for rho in (vac, coh):
        vm, vi = evaluator.variances(rho)
        assert (vm + vi).min() > ENTANGLEMENT_THRESHOLD


def test_optimal_scale_sits_at_the_lobe_separation(cat3):
    _, _, px, pp = cat3
    lp_grid = np.arange(7.5, 9.51, 0.1)
    rec = optimize_lp(px, pp, lp_grid)
    assert abs(rec.l_p - LP_CAT3) <= 0.1 + 1e-12
    assert rec.entangled


def test_optimize_lp_edge_cases(cat3):
    _, _, px, pp = cat3
    only = optimize_lp(px, pp, [3.0])
    assert only.l_p == 3.0
    unsorted_dup = optimize_lp(px, pp, [5.0, 3.0, 3.0])
    assert unsorted_dup.l_p in (3.0, 5.0)
    with pytest.raises(ValueError):
        optimize_lp(px, pp, [])
    with pytest.raises(ValueError):
        optimize_lp(px, pp, [-1.0])


def test_refining_the_scale_grid_never_raises_the_minimum():
    space = ModeSpace(16, 2)
    rho = DensityMatrix.from_state(entangled_cat(1j * math.sqrt(2.0), "even", space))
    coarse = CriterionEvaluator(space, GRID, np.arange(2.0, 6.01, 0.2)).evaluate(rho)
    fine = CriterionEvaluator(space, GRID, np.arange(2.0, 6.01, 0.05)).evaluate(rho)
    assert fine.c_mec <= coarse.c_mec


def test_criterion_is_invariant_under_mode_swap():
    space = ModeSpace(6, 2)
    rho = random_density(space, seed=11)
    c = space.cutoff
    swapped = DensityMatrix(
        rho.data.reshape(c, c, c, c).transpose(1, 0, 3, 2).reshape(c * c, c * c),
        space)
    for variables in VariableSet:
        ev = CriterionEvaluator(space, GRID, [3.0, 4.4], variables)
        vm1, vi1 = ev.variances(rho)
        vm2, vi2 = ev.variances(swapped)
        np.testing.assert_allclose(vm1, vm2, atol=1e-12)
        np.testing.assert_allclose(vi1, vi2, atol=1e-12)


def test_variances_are_stable_under_grid_refinement(cat3):
    rho, grid, px, pp = cat3
    rec = evaluate_criterion(px, pp, ModularScales.from_momentum_scale(LP_CAT3))
    fine = QuadratureGrid(half_width=grid.half_width, step=grid.step / 2.0)
    rec_f = evaluate_criterion(joint_position_distribution(rho, fine),
                               joint_momentum_distribution(rho, fine),
                               ModularScales.from_momentum_scale(LP_CAT3))
    assert abs(rec_f.var_modular - rec.var_modular) < 1e-3
    assert abs(rec_f.var_integer - rec.var_integer) < 1e-3


def test_collective_distributions_for_the_cat(cat3):
    _, _, px, pp = cat3
    scales = ModularScales.from_momentum_scale(LP_CAT3)
    dist_mod, dist_int = collective_distributions(px, pp, scales)
    assert abs(dist_mod.total() - 1.0) < 1e-4
    assert abs(dist_int.total() - 1.0) < 1e-4
    assert dist_mod.lower == 0.0
    assert dist_mod.upper == pytest.approx(2.0 * scales.l_x)
    rec = evaluate_criterion(px, pp, scales)
    assert abs(dist_mod.variance() / scales.l_x ** 2 - rec.var_modular) < 1e-3
    # all correlated-lobe mass sits at relative integer 0
    w0 = dist_int.weights[list(dist_int.values).index(0)]
    assert abs(w0 - 1.0) < 1e-6
    assert dist_int.variance() < 1e-6


def test_collective_distributions_odd_support():
    space = ModeSpace(32, 2)
    rho = DensityMatrix.from_state(entangled_cat(3j, "odd", space))
    grid = default_grid(3j)
    px = joint_position_distribution(rho, grid)
    pp = joint_momentum_distribution(rho, grid)
    scales = ModularScales.from_momentum_scale(LP_CAT3)
    dist_mod, dist_int = collective_distributions(px, pp, scales,
                                                  VariableSet.ODD_PARITY)
    assert dist_mod.lower == pytest.approx(-scales.l_x)
    assert dist_mod.upper == pytest.approx(scales.l_x)
    assert abs(dist_mod.total() - 1.0) < 1e-4
    assert abs(dist_int.total() - 1.0) < 1e-4


def test_collective_distributions_validation(cat3):
    _, _, px, pp = cat3
    scales = ModularScales.from_momentum_scale(LP_CAT3)
    with pytest.raises(ValueError):
        collective_distributions(px, pp, scales, n_bins=0)
    with pytest.raises(ValueError):
        collective_distributions(pp, px, scales)  # kinds swapped
    # position period 2*pi/126 falls below the grid step
    with pytest.raises(ValueError, match="period"):
        collective_distributions(px, pp, ModularScales.from_momentum_scale(126.0))


def test_single_mode_uncertainty_bound_holds():
    vac = np.zeros((16, 16), dtype=complex)
    vac[0, 0] = 1.0
    rho_vac = DensityMatrix(vac, ModeSpace(16))
    for lp in (1.0, 2.0, 4.0, 8.0):
        var_n, var_x = modular_uncertainty(rho_vac, ModularScales.from_momentum_scale(lp))
        assert var_n + var_x >= SINGLE_MODE_BOUND
    for seed in range(20):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
        rho = DensityMatrix((m @ m.conj().T) / np.trace(m @ m.conj().T).real,
                            ModeSpace(10))
        lp = float(rng.uniform(1.0, 8.0))
        var_n, var_x = modular_uncertainty(rho, ModularScales.from_momentum_scale(lp))
        assert var_n + var_x >= SINGLE_MODE_BOUND


def test_single_mode_cat_uncertainty():
    # the lobes straddle a period boundary, so the integer part is an even
    # coin flip (variance 1/4) and the fringe maxima sit at the period edges
    # (variance 1/12 + 1/(2 pi^2)); the sum stays well above the bound
    rho = DensityMatrix.from_state(cat_state(3j, 1, ModeSpace(32)))
    var_n, var_x = modular_uncertainty(rho, ModularScales.from_momentum_scale(LP_CAT3))
    assert abs(var_n - 0.25) < 1e-3
    assert abs(var_x - (1.0 / 12.0 + 1.0 / (2.0 * math.pi ** 2))) < 1e-3
    assert var_n + var_x >= SINGLE_MODE_BOUND


def test_qualifier_over_time_smoke():
    space = ModeSpace(12, 2)
    params = ModelParams(S=1.0, gamma_s=0.0, gamma_c=10.0)
    controls = IntegrationControls(dt=2e-3, t_final=1.0, sample_every=100)
    trace = integrate(vacuum_state(space), params, controls, space,
                      store_snapshots=True)
    lp_grid = np.arange(2.0, 6.01, 0.1)
    with pytest.warns(RuntimeWarning, match="final sample"):
        result = qualifier_over_time(trace, GRID, lp_grid)
    assert len(result.records) == len(trace.times)
    assert result.c_mec_min == min(r.c_mec for r in result.records)
    assert result.time_at_min == trace.times[-1]
    assert result.lp_at_min in lp_grid
    c_values = [r.c_mec for r in result.records]
    assert all(b < a for a, b in zip(c_values, c_values[1:]))  # still converging


def test_qualifier_requires_snapshots():
    space = ModeSpace(8, 2)
    trace = integrate(vacuum_state(space),
                      ModelParams(S=0.5, gamma_s=0.0, gamma_c=2.0),
                      IntegrationControls(dt=2e-3, t_final=0.1, sample_every=50),
                      space)
    with pytest.raises(ValueError, match="snapshots"):
        qualifier_over_time(trace, GRID)


def test_validation_errors():
    space = ModeSpace(6, 2)
    rho = random_density(space, seed=3)
    px = joint_position_distribution(rho, GRID)
    pp = joint_momentum_distribution(rho, GRID)
    with pytest.raises(ValueError):
        evaluate_criterion(pp, px, ModularScales.from_momentum_scale(4.0))
    with pytest.raises(ValueError):
        evaluate_criterion(px, pp, ModularScales.from_momentum_scale(4.0),
                           "sideways_parity")
    with pytest.raises(ValueError):
        CriterionEvaluator(ModeSpace(6), GRID)
    with pytest.raises(ValueError):
        CriterionEvaluator(space, GRID, [])
    with pytest.raises(ValueError):
        CriterionEvaluator(space, GRID, [4.0, -2.0])
    assert not DEFAULT_LP_GRID.flags.writeable


def test_default_lp_grid_brackets_the_working_point():
    assert DEFAULT_LP_GRID[0] == 2.0
    assert DEFAULT_LP_GRID[-1] == 6.0
    steps = np.diff(DEFAULT_LP_GRID)
    np.testing.assert_allclose(steps, 0.02, atol=1e-12)
    assert 4.0 in DEFAULT_LP_GRID
