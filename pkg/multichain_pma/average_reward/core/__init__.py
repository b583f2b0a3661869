"""Numerical core: validation, chain structure, values, projections and mirror ascent."""

from .chain_analysis import (
    canonical_decompose,
    cesaro_limit,
    chain_constants,
    classify,
    classify_chain,
    estimate_cover_time,
    exact_cover_time,
    expected_target_time,
    hitting_times,
    solve_block,
    stationary_distribution,
    target_time_report,
    transient_half_life,
    visitation,
)
from .errors import (
    ClassificationInconsistencyError,
    DimensionMismatchError,
    InfeasibleConfigError,
    InvalidMdpError,
    InvalidPolicyError,
    MdpError,
    ProjectionError,
    SingularBlockError,
    StepTooLargeError,
    SupportError,
)
from .mdp_core import (
    as_distribution,
    induce_chain,
    perturb_policy,
    require_interior,
    uniform_distribution,
    validate_mdp,
    validate_policy,
)
from .oracles import brute_force_project, truncated_cesaro_average
from .pma import (
    PolicyMirrorAscent,
    check_linear_envelope,
    check_sublinear_envelope,
    compute_reference,
    iterations_to_epsilon,
    estimate_coefficients,
    run_pma,
    select_alpha_weakly_communicating,
)
from .policy_iteration import policy_iteration
from .projection import divergence, euclid_project_floor, kl_project_floor, mirror_step, mirror_table
from .sampling import (
    GenerativeModel,
    StochasticPolicyMirrorAscent,
    check_inexact_envelope,
    classify_by_sampling,
    classify_by_sampling_with_retry,
    critic,
    critic_budget,
    exact_gradient_oracle,
    rollout,
    run_spma,
    suggest_windows,
)
from .values import (
    bellman_residuals,
    evaluate,
    evaluate_any,
    finite_diff_directional,
    gain,
    performance_difference,
    policy_gradient,
)

__all__ = [
    "ClassificationInconsistencyError",
    "DimensionMismatchError",
    "GenerativeModel",
    "InfeasibleConfigError",
    "InvalidMdpError",
    "InvalidPolicyError",
    "MdpError",
    "PolicyMirrorAscent",
    "ProjectionError",
    "SingularBlockError",
    "StepTooLargeError",
    "StochasticPolicyMirrorAscent",
    "SupportError",
    "as_distribution",
    "bellman_residuals",
    "brute_force_project",
    "canonical_decompose",
    "cesaro_limit",
    "chain_constants",
    "check_inexact_envelope",
    "check_linear_envelope",
    "check_sublinear_envelope",
    "classify",
    "classify_by_sampling",
    "classify_by_sampling_with_retry",
    "classify_chain",
    "compute_reference",
    "iterations_to_epsilon",
    "critic",
    "critic_budget",
    "divergence",
    "estimate_coefficients",
    "estimate_cover_time",
    "euclid_project_floor",
    "evaluate",
    "evaluate_any",
    "exact_cover_time",
    "exact_gradient_oracle",
    "expected_target_time",
    "finite_diff_directional",
    "gain",
    "hitting_times",
    "induce_chain",
    "kl_project_floor",
    "mirror_step",
    "mirror_table",
    "performance_difference",
    "perturb_policy",
    "policy_gradient",
    "policy_iteration",
    "require_interior",
    "rollout",
    "run_pma",
    "run_spma",
    "solve_block",
    "stationary_distribution",
    "suggest_windows",
    "target_time_report",
    "transient_half_life",
    "truncated_cesaro_average",
    "uniform_distribution",
    "validate_mdp",
    "validate_policy",
    "visitation",
]
