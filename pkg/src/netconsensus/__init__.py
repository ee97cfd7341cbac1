"""Consensus dynamics on weighted digraphs, their Markov duals, and the
delayed variants: simulation, stationary distributions, conserved
quantities, closed-form limit values, and delay-stability analysis.
"""

from .errors import AmbiguityError, DimensionError, NumericalError
from .matcore import (
    Spectrum,
    adjugate,
    determinant,
    eigenvalues,
    left_null_vector,
    mat_exp,
)
from .netgraph import (
    LaplacianData,
    WeightedDigraph,
    gershgorin_check,
    laplacian,
    linearize,
    preset_chain,
    preset_complete,
    preset_ring,
    preset_star,
)
from .kernel import (
    DelayKernel,
    kernel_discrete,
    kernel_mixture,
    kernel_uniform,
    mean_delay,
    quadrature_weights,
    transform_F,
)
from .markov import (
    ChainState,
    DualityReport,
    StationaryDistribution,
    chain_step,
    discrete_consensus,
    duality_check,
    h1_check,
    is_stochastic,
    p_epsilon,
    stationary,
)
from .dde import (
    ConsensusReport,
    HistoryTrajectory,
    affine_history,
    consensus_report,
    conserved_processing,
    conserved_q,
    constant_history,
    detect_consensus,
    polynomial_history,
    predict_processing,
    predict_propagation,
    simulate_processing,
    simulate_propagation,
    trajectory_to_csv,
)
from .spectral import (
    SearchBox,
    SpectralReport,
    chi_processing,
    chi_prime_zero,
    chi_propagation,
    hayes_threshold,
    processing_verdict,
    propagation_verdict,
    scalar_roots,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError", "DimensionError", "NumericalError",
    "Spectrum", "determinant", "adjugate", "mat_exp", "eigenvalues",
    "left_null_vector",
    "WeightedDigraph", "LaplacianData", "laplacian", "gershgorin_check",
    "preset_chain", "preset_ring", "preset_star", "preset_complete",
    "linearize",
    "DelayKernel", "kernel_discrete", "kernel_uniform", "kernel_mixture",
    "mean_delay", "transform_F", "quadrature_weights",
    "StationaryDistribution", "ChainState", "DualityReport",
    "p_epsilon", "is_stochastic", "stationary", "h1_check", "chain_step",
    "discrete_consensus", "duality_check",
    "HistoryTrajectory", "ConsensusReport",
    "simulate_propagation", "simulate_processing",
    "conserved_q", "conserved_processing",
    "predict_propagation", "predict_processing",
    "detect_consensus", "consensus_report", "trajectory_to_csv",
    "constant_history", "affine_history", "polynomial_history",
    "SearchBox", "SpectralReport",
    "chi_propagation", "chi_processing", "chi_prime_zero",
    "scalar_roots", "hayes_threshold",
    "processing_verdict", "propagation_verdict",
]
