"""Fractional-order dynamics toolkit.

A predictor-corrector solver for Caputo fractional initial value problems,
a three-neuron Hopfield network model built on it, linear stability and
fractional-divergence analysis, trajectory classification, and the
bifurcation, basin and step-size experiments, all behind one CLI.
"""

__version__ = "0.1.0"

from .solver import (
    FractionalIVP,
    IntegrationError,
    SolverConfig,
    Trajectory,
    abm_integrate,
    convergence_order_estimate,
    corrector_weight_a,
    gamma_real,
    predictor_weight_b,
)
from .hopfield import (
    DEFAULT_W,
    Equilibrium,
    HnnField,
    HnnParams,
    NOMINAL_EQUILIBRIA,
    find_equilibria,
    hnn_jacobian,
    hnn_rhs,
    sech2,
)
from .stability import (
    DivergenceSeries,
    Spectrum,
    StabilityReport,
    caputo_monomial,
    divergence_series,
    eigenvalues_3x3,
    fractional_divergence,
    integer_divergence,
    stability_index,
)
from .analysis import (
    BasinGrid,
    BifurcationDataset,
    BranchShift,
    ClassifierSettings,
    ColumnFamily,
    HiddenAttractorReport,
    MaximaSet,
    PlaneSpec,
    ShiftTable,
    SweepSpec,
    TrajectoryClass,
    basin_scan,
    bifurcation_sweep,
    branch_shift,
    classify_trajectory,
    closing_error,
    cluster_maxima,
    cross_section,
    extract_maxima,
    h_delay_study,
    hidden_attractor_test,
    plane_basis,
)

__all__ = [
    "__version__",
    "FractionalIVP", "IntegrationError", "SolverConfig", "Trajectory",
    "abm_integrate", "convergence_order_estimate", "corrector_weight_a",
    "gamma_real", "predictor_weight_b",
    "DEFAULT_W", "Equilibrium", "HnnField", "HnnParams", "NOMINAL_EQUILIBRIA",
    "find_equilibria", "hnn_jacobian", "hnn_rhs", "sech2",
    "DivergenceSeries", "Spectrum", "StabilityReport", "caputo_monomial",
    "divergence_series", "eigenvalues_3x3", "fractional_divergence",
    "integer_divergence", "stability_index",
    "BasinGrid", "BifurcationDataset", "BranchShift", "ClassifierSettings",
    "ColumnFamily", "HiddenAttractorReport", "MaximaSet", "PlaneSpec",
    "ShiftTable", "SweepSpec", "TrajectoryClass", "basin_scan",
    "bifurcation_sweep", "branch_shift", "classify_trajectory",
    "closing_error", "cluster_maxima", "cross_section", "extract_maxima",
    "h_delay_study", "hidden_attractor_test", "plane_basis",
]
