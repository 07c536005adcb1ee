"""Fundamental gaps of discrete Schroedinger operators on paths and hypercubes."""

from .analysis import (
    HYPERCUBE_BOUND,
    CasoratianSeq,
    DegenerateEigenvalueError,
    DiagonalFamily,
    GapReport,
    NodeList,
    PreconditionError,
    SignConventionError,
    SignRegionError,
    TheoremInapplicable,
    ThetaSeq,
    casoratian,
    check_decreasing_region,
    check_ground_monotone,
    check_node_left_of_center,
    check_ordering,
    check_ordering_interpolated,
    convex_combination_recurrence_check,
    fd_gap_derivative,
    find_sign_regions,
    gap_derivative,
    gap_report,
    generalized_zeros,
    hf_derivative,
    lemma_upper_check,
    node_trajectory,
    nodes,
    path_bound,
    theta_sequence,
    verify_interlacing,
    verify_node_separation,
)
from .flow import FlowState, FlowTrace, flow_step, flow_to_linear, secant_potential
from .linalg import (
    EigenPair,
    EigenSolverError,
    JacobiMatrix,
    SpectrumSlice,
    dense_oracle_spectrum,
    eigenpair,
    eigenpairs_lowest,
    eigenvalues_lowest,
    sturm_count,
)
from .operators import (
    HammingPotential,
    PathPotential,
    SymmetricReduction,
    UnitLinear,
    VPrimeTransform,
    build_hypercube_full,
    build_hypercube_reduced,
    build_operator,
    build_path,
    potential_from_spec,
    random_convex,
    vprime_transform,
)

__version__ = "0.1.0"
