"""Graph estimation with side information.

Neighborhood-wise weighted lasso where pairwise distances shape the
penalty on each coefficient, alongside the reference estimators
(uniform-penalty neighborhoods, partial-correlation thresholding,
penalized covariance inversion) and the simulation and evaluation
machinery used to compare them.
"""

from .errors import (
    AllWeightsZero,
    BothEmpty,
    ConvergenceFailure,
    DegenerateSpectrum,
    DidNotConverge,
    DimensionMismatch,
    EmptyTruth,
    LengthMismatch,
    NotPositiveDefinite,
    RequiresMoreSamples,
    SignetError,
    SingularMatrix,
)
from .rng import substream, substream_seed
from .linalg import (
    cholesky,
    condition_number,
    eigen_symmetric,
    invert_spd,
    is_positive_definite,
    symmetrize,
)
from .penalty import (
    DistanceInfo,
    LinkFunction,
    PenaltyField,
    build_penalty_field,
    uniform_penalty_field,
)
from .solver import (
    BayesParams,
    Coefficients,
    WeightedLassoProblem,
    kkt_residual,
    neg_log_posterior,
    solve_weighted_lasso,
    solve_weighted_lasso_gram,
    weighted_lasso_objective,
)
from .estimators import (
    EdgeSet,
    estimate_glasso,
    estimate_mb,
    estimate_si,
    estimate_thr,
    fit_neighborhoods,
    glasso_path,
    partial_correlations,
    sample_covariance,
)
from .tuning import (
    CvConfig,
    ScalePath,
    bic_select_glasso,
    cv_calibrated_edges,
    cv_select_scale,
    lambda_max,
    match_edge_count_threshold,
    oracle_threshold,
    oracle_tune,
)
from .simulate import (
    SimulatedInstance,
    distance_bernoulli_graph,
    load_instance,
    make_distance_bernoulli_instance,
    make_pa_condnum_instance,
    precision_from_edges_condnum,
    precision_from_edges_fixed,
    preferential_attachment_graph,
    sample_gaussian,
    save_instance,
    synthetic_coordinates,
)
from .metrics import (
    ReproducibilityReport,
    RocCurve,
    agreement_percent,
    average_roc,
    hamming,
    roc_from_edge_sets,
    split_half_reproducibility,
)
from .experiments import run_figure1, run_figure2, run_table1_sim

__version__ = "0.1.0"

__all__ = [
    "AllWeightsZero",
    "BayesParams",
    "BothEmpty",
    "Coefficients",
    "ConvergenceFailure",
    "CvConfig",
    "DegenerateSpectrum",
    "DidNotConverge",
    "DimensionMismatch",
    "DistanceInfo",
    "EdgeSet",
    "EmptyTruth",
    "LengthMismatch",
    "LinkFunction",
    "NotPositiveDefinite",
    "PenaltyField",
    "ReproducibilityReport",
    "RequiresMoreSamples",
    "RocCurve",
    "ScalePath",
    "SignetError",
    "SimulatedInstance",
    "SingularMatrix",
    "WeightedLassoProblem",
    "agreement_percent",
    "average_roc",
    "bic_select_glasso",
    "build_penalty_field",
    "cholesky",
    "condition_number",
    "cv_calibrated_edges",
    "cv_select_scale",
    "distance_bernoulli_graph",
    "eigen_symmetric",
    "estimate_glasso",
    "estimate_mb",
    "estimate_si",
    "estimate_thr",
    "fit_neighborhoods",
    "glasso_path",
    "hamming",
    "invert_spd",
    "is_positive_definite",
    "kkt_residual",
    "lambda_max",
    "load_instance",
    "make_distance_bernoulli_instance",
    "make_pa_condnum_instance",
    "match_edge_count_threshold",
    "neg_log_posterior",
    "oracle_threshold",
    "oracle_tune",
    "partial_correlations",
    "precision_from_edges_condnum",
    "precision_from_edges_fixed",
    "preferential_attachment_graph",
    "roc_from_edge_sets",
    "run_figure1",
    "run_figure2",
    "run_table1_sim",
    "sample_covariance",
    "sample_gaussian",
    "save_instance",
    "solve_weighted_lasso",
    "solve_weighted_lasso_gram",
    "split_half_reproducibility",
    "substream",
    "substream_seed",
    "symmetrize",
    "synthetic_coordinates",
    "uniform_penalty_field",
    "weighted_lasso_objective",
]
