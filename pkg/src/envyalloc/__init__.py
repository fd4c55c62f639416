"""Envy-free allocation of indivisible items under random additive utilities.

Library + CLI for threshold-matching allocators with candidate pruning,
perfect r-matching solvers with an exhaustive Hall-condition oracle,
closed-form evaluators of the associated thresholds and probability bounds,
and reproducible Monte Carlo sweeps over (agents, items) grids.

Hot kernels run in a compiled extension when available, with a pure
NumPy/Python twin selected at import otherwise; ``BACKEND`` names the active
one.
"""

from ._backend import BACKEND
from .allocators import (
    AllocatorError,
    BruteForceResult,
    CapExceeded,
    CertificateReport,
    PostCheckError,
    RemovalEntry,
    RemovalLog,
    TauChoice,
    TauMode,
    ThresholdError,
    brute_force_ef_exists,
    constant_mode_tau,
    removal_phase,
    select_tau,
    threshold_matching,
    threshold_matching_with_removal,
    verify_removal_certificates,
    welfare_maximizing,
)
from .analysis import (
    AnalysisError,
    GlobalBound,
    NonExistenceBoundParams,
    PerAllocationBound,
    certificate_density_constant,
    certificate_threshold,
    coupon_threshold,
    global_nonexistence_bound,
    max_admissible_r,
    no_envy_base,
    no_envy_base_log,
    nonexistence_constant,
    per_allocation_ef_bound,
)
from .core import (
    Allocation,
    EnvyResult,
    Instance,
    InstanceError,
    bundle_utility,
    generate_instance,
    is_balanced,
    is_envy_free,
    sum_top_r,
)
from .distributions import (
    DistributionError,
    DistributionSpec,
    PolyBoundParams,
    poly_bound_params,
    quantile,
    sample,
    sample_block,
    tail_prob,
    verify_poly_bound,
)
from .experiments import (
    ContrastResult,
    CouponRow,
    ExperimentError,
    SweepConfig,
    SweepResult,
    TrialRecord,
    coupon_experiment,
    default_config,
    divisibility_contrast,
    run_sweep,
    run_trial,
    wilson_interval,
)
from .matching import (
    BipartiteGraph,
    DimensionMismatch,
    GraphError,
    RMatching,
    find_perfect_r_matching,
    hall_violation_search,
    validate_r_matching,
)
from .rng import Stream, derive_key, mix64

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # distributions
    "DistributionError",
    "DistributionSpec",
    "PolyBoundParams",
    "poly_bound_params",
    "quantile",
    "sample",
    "sample_block",
    "tail_prob",
    "verify_poly_bound",
    # rng
    "Stream",
    "derive_key",
    "mix64",
    # core
    "Allocation",
    "EnvyResult",
    "Instance",
    "InstanceError",
    "bundle_utility",
    "generate_instance",
    "is_balanced",
    "is_envy_free",
    "sum_top_r",
    # matching
    "BipartiteGraph",
    "DimensionMismatch",
    "GraphError",
    "RMatching",
    "find_perfect_r_matching",
    "hall_violation_search",
    "validate_r_matching",
    # allocators
    "AllocatorError",
    "BruteForceResult",
    "CapExceeded",
    "CertificateReport",
    "PostCheckError",
    "RemovalEntry",
    "RemovalLog",
    "TauChoice",
    "TauMode",
    "ThresholdError",
    "brute_force_ef_exists",
    "constant_mode_tau",
    "removal_phase",
    "select_tau",
    "threshold_matching",
    "threshold_matching_with_removal",
    "verify_removal_certificates",
    "welfare_maximizing",
    # analysis
    "AnalysisError",
    "GlobalBound",
    "NonExistenceBoundParams",
    "PerAllocationBound",
    "certificate_density_constant",
    "certificate_threshold",
    "coupon_threshold",
    "global_nonexistence_bound",
    "max_admissible_r",
    "no_envy_base",
    "no_envy_base_log",
    "nonexistence_constant",
    "per_allocation_ef_bound",
    # experiments
    "ContrastResult",
    "CouponRow",
    "ExperimentError",
    "SweepConfig",
    "SweepResult",
    "TrialRecord",
    "coupon_experiment",
    "default_config",
    "divisibility_contrast",
    "run_sweep",
    "run_trial",
    "wilson_interval",
]
