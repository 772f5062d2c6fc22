"""Transductive regression on a fixed sample with stability-driven bounds.

The toolkit covers the uniform-partition setting: a full sample of m+u
points is fixed, m of them are drawn uniformly without replacement as the
labeled set, and a hypothesis is scored on the remaining u points.  It
provides exact solvers for several graph and kernel regressors, closed-form
swap-stability coefficients with a matching lower-bound instance, the
concentration and generalization bounds built on them, and a CLI that runs
partitioned experiments reproducibly from a single seed.
"""

from .errors import (
    BoundDiverges,
    ConstraintSpansNullSpace,
    EmptyNeighborhood,
    GraphDisconnected,
    InvalidConfidence,
    InvalidInstance,
    InvalidPartitionSize,
    InvalidStabilityInput,
    NoFeasibleRadius,
    NoSweepData,
    NotInRange,
    NotPSDKernel,
    NotSymmetric,
    ParseError,
    PseudoTargetUnavailable,
    SingularSystem,
    StabregError,
    ZeroConstraintVector,
    ZeroDegreeVertex,
    ZeroRowSum,
    ZeroVarianceFeature,
)
from .core import (
    FullSample,
    HypothesisScores,
    Partition,
    SwapPair,
    apply_swap,
    empirical_error,
    enumerate_swaps,
    overall_error,
    sample_partition,
    score_to_cost_stability,
    test_error,
)
from .graph import (
    GraphSpec,
    SpectrumSummary,
    diameter,
    gaussian_affinity,
    is_connected,
    laplacian,
    load_edge_list,
    normalized_laplacian,
    pseudo_inverse,
    projector_orthogonal_to,
    row_normalize,
    save_edge_list,
    spectrum,
)
from .bounds import (
    BoundReport,
    ConcentrationResult,
    alpha,
    concentration_harness,
    generalization_bound,
)
from .regressors import (
    ConstrainedProblem,
    LocalEstimatorConfig,
    LtrProblem,
    UnconstrainedProblem,
    build_cm,
    build_gmf,
    build_llreg,
    gaussian_kernel,
    laplacian_kernel_check,
    ltr_dual_coefficients,
    ltr_objective,
    pseudo_targets,
    solve_constrained,
    solve_krr_induction,
    solve_ltr,
    solve_unconstrained,
    stabilize,
)
from .stability import (
    EmpiricalStabilityReport,
    StabilityInputs,
    belkin_cost_stability,
    belkin_score_stability,
    beta_loc_bound,
    beta_loc_gaussian,
    beta_loc_invdist,
    cm_lower_bound_demo,
    cm_lower_bound_instance,
    cm_score_bound,
    empirical_stability,
    llreg_score_bound,
    llreg_score_bound_spectral,
    ltr_stability_bound,
    unconstrained_score_bound,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "StabregError",
    "InvalidPartitionSize",
    "InvalidStabilityInput",
    "InvalidConfidence",
    "InvalidInstance",
    "ZeroDegreeVertex",
    "NotSymmetric",
    "ZeroConstraintVector",
    "GraphDisconnected",
    "ZeroRowSum",
    "SingularSystem",
    "ConstraintSpansNullSpace",
    "NotPSDKernel",
    "PseudoTargetUnavailable",
    "NotInRange",
    "BoundDiverges",
    "EmptyNeighborhood",
    "NoFeasibleRadius",
    "NoSweepData",
    "ParseError",
    "ZeroVarianceFeature",
    # core
    "FullSample",
    "Partition",
    "HypothesisScores",
    "SwapPair",
    "sample_partition",
    "empirical_error",
    "test_error",
    "overall_error",
    "score_to_cost_stability",
    "enumerate_swaps",
    "apply_swap",
    # graph
    "GraphSpec",
    "SpectrumSummary",
    "laplacian",
    "normalized_laplacian",
    "spectrum",
    "pseudo_inverse",
    "projector_orthogonal_to",
    "is_connected",
    "diameter",
    "row_normalize",
    "gaussian_affinity",
    "load_edge_list",
    "save_edge_list",
    # bounds
    "alpha",
    "BoundReport",
    "generalization_bound",
    "ConcentrationResult",
    "concentration_harness",
    # regressors
    "UnconstrainedProblem",
    "ConstrainedProblem",
    "LtrProblem",
    "LocalEstimatorConfig",
    "build_cm",
    "build_llreg",
    "build_gmf",
    "solve_unconstrained",
    "stabilize",
    "solve_constrained",
    "laplacian_kernel_check",
    "gaussian_kernel",
    "pseudo_targets",
    "ltr_dual_coefficients",
    "ltr_objective",
    "solve_ltr",
    "solve_krr_induction",
    # stability
    "StabilityInputs",
    "ltr_stability_bound",
    "unconstrained_score_bound",
    "cm_score_bound",
    "llreg_score_bound",
    "llreg_score_bound_spectral",
    "belkin_score_stability",
    "belkin_cost_stability",
    "beta_loc_bound",
    "beta_loc_gaussian",
    "beta_loc_invdist",
    "EmpiricalStabilityReport",
    "empirical_stability",
    "cm_lower_bound_instance",
    "cm_lower_bound_demo",
]
