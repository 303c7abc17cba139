"""Simulator for two dissipatively coupled degenerate parametric oscillators
with a modular-variables entanglement certifier."""

from dopocat.analysis import (
    DEFAULT_SECTION_STEP,
    DISPLACEMENT_TOL,
    FidelityReport,
    WignerSection,
    default_section_grid,
    fidelity_to_pure,
    max_cat_fidelity_single_mode,
    purity,
    wigner_section,
    write_section_csv,
)
from dopocat.fock import (
    DensityMatrix,
    ModeSpace,
    Operator,
    StateVector,
    annihilation,
    cat_state,
    classical_mixture,
    coherent_state,
    embed,
    entangled_cat,
    pad_state,
    partial_trace,
    product_state,
)
from dopocat.lindblad import (
    EvolutionTrace,
    IntegrationControls,
    IntegrationError,
    ModelParams,
    dissipator,
    hamiltonian,
    integrate,
    integrate_single_mode,
    liouvillian_rhs,
    squeezed_single_photon_dissipator,
    vacuum_state,
)
from dopocat.modular import (
    DEFAULT_LP_GRID,
    ENTANGLEMENT_THRESHOLD,
    SINGLE_MODE_BOUND,
    CriterionEvaluator,
    CriterionRecord,
    IntegerDistribution,
    ModularHistogram,
    ModularScales,
    QualifierResult,
    VariableSet,
    collective_distributions,
    evaluate_criterion,
    modular_decompose,
    modular_uncertainty,
    optimize_lp,
    qualifier_over_time,
)
from dopocat.sweep import (
    WORKERS_ENV_VAR,
    RunConfig,
    SweepAxis,
    SweepConfig,
    SweepResult,
    extract_boundary,
    load_run_config,
    load_sweep_config,
    read_snapshot,
    run_single,
    run_squeezed_suite,
    run_sweep,
    write_snapshot,
)
from dopocat.quadrature import (
    JointDistribution,
    QuadratureGrid,
    default_grid,
    hermite_wavefunction_table,
    joint_momentum_distribution,
    joint_position_distribution,
    momentum_distribution,
    position_distribution,
    write_distribution_csv,
)

__all__ = [
    "DEFAULT_LP_GRID",
    "DEFAULT_SECTION_STEP",
    "DISPLACEMENT_TOL",
    "ENTANGLEMENT_THRESHOLD",
    "SINGLE_MODE_BOUND",
    "WORKERS_ENV_VAR",
    "CriterionEvaluator",
    "CriterionRecord",
    "DensityMatrix",
    "EvolutionTrace",
    "FidelityReport",
    "IntegerDistribution",
    "IntegrationControls",
    "IntegrationError",
    "JointDistribution",
    "ModeSpace",
    "ModelParams",
    "ModularHistogram",
    "ModularScales",
    "Operator",
    "QuadratureGrid",
    "QualifierResult",
    "RunConfig",
    "StateVector",
    "SweepAxis",
    "SweepConfig",
    "SweepResult",
    "VariableSet",
    "WignerSection",
    "annihilation",
    "cat_state",
    "classical_mixture",
    "coherent_state",
    "collective_distributions",
    "default_grid",
    "default_section_grid",
    "dissipator",
    "embed",
    "entangled_cat",
    "evaluate_criterion",
    "extract_boundary",
    "fidelity_to_pure",
    "hamiltonian",
    "hermite_wavefunction_table",
    "integrate",
    "integrate_single_mode",
    "joint_momentum_distribution",
    "joint_position_distribution",
    "liouvillian_rhs",
    "load_run_config",
    "load_sweep_config",
    "max_cat_fidelity_single_mode",
    "modular_decompose",
    "modular_uncertainty",
    "momentum_distribution",
    "optimize_lp",
    "pad_state",
    "partial_trace",
    "position_distribution",
    "product_state",
    "purity",
    "qualifier_over_time",
    "read_snapshot",
    "run_single",
    "run_squeezed_suite",
    "run_sweep",
    "squeezed_single_photon_dissipator",
    "vacuum_state",
    "wigner_section",
    "write_snapshot",
    "write_distribution_csv",
    "write_section_csv",
]
