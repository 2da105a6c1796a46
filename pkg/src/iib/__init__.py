"""Intertwining information bottleneck on finite alphabets."""

from .equivariance import (
    EquivarianceGroup,
    EquivariancePair,
    Infeasible,
    JointNotFullySupported,
    NoUniformizingInput,
    SearchBudgetExceeded,
    SearchConfig,
    Theorem1Report,
    check_group_axioms,
    enumerate_group,
    find_uniformizing_input,
    is_equivariance,
    is_invariance,
    verify_theorem1,
)
from .foundation import (
    EXACT,
    FLOAT,
    Alphabet,
    BottleneckChannel,
    Channel,
    DimensionMismatch,
    Dist,
    IIBError,
    InvalidDistribution,
    JointDist,
    ModeMismatch,
    Permutation,
    compose,
    identity_channel,
    permutation_to_channel,
    product_permutation,
    pushforward,
    tensor,
)
from .info_measures import (
    KL,
    ExactNats,
    entropy,
    iib_constraint,
    iib_objective,
    kl_divergence,
    mutual_information,
    to_bits,
)
from .iterative import SolverConfig, pareto_sweep, solve_iib_at
from .partition import (
    IIBSolution,
    MarginalNotFullSupport,
    PartitionConfig,
    SupportPartition,
    build_partition,
    canonical_kappa,
    is_congruent,
    is_iib_max_solution,
    likelihood_ratio,
    solve_iib_max,
)
from .reductions import (
    LiftedChannel,
    check_equality_at_optimum,
    lift_ib,
    lift_ib_y,
    lift_sib,
    verify_ib_identities,
    verify_sib_identities,
)
from .soft import (
    SoftPair,
    SoftSearchConfig,
    compose_pairs,
    is_soft_equivariance,
    kernel_residual,
    perturbation_study,
    search_soft_equivariances,
)

__version__ = "0.1.0"

__all__ = [
    "EquivarianceGroup",
    "EquivariancePair",
    "Infeasible",
    "JointNotFullySupported",
    "NoUniformizingInput",
    "SearchBudgetExceeded",
    "SearchConfig",
    "Theorem1Report",
    "check_group_axioms",
    "enumerate_group",
    "find_uniformizing_input",
    "is_equivariance",
    "is_invariance",
    "verify_theorem1",
    "EXACT",
    "FLOAT",
    "Alphabet",
    "BottleneckChannel",
    "Channel",
    "DimensionMismatch",
    "Dist",
    "IIBError",
    "InvalidDistribution",
    "JointDist",
    "ModeMismatch",
    "Permutation",
    "compose",
    "identity_channel",
    "permutation_to_channel",
    "product_permutation",
    "pushforward",
    "tensor",
    "KL",
    "ExactNats",
    "entropy",
    "iib_constraint",
    "iib_objective",
    "kl_divergence",
    "mutual_information",
    "to_bits",
    "SolverConfig",
    "pareto_sweep",
    "solve_iib_at",
    "IIBSolution",
    "MarginalNotFullSupport",
    "PartitionConfig",
    "SupportPartition",
    "build_partition",
    "canonical_kappa",
    "is_congruent",
    "is_iib_max_solution",
    "likelihood_ratio",
    "solve_iib_max",
    "LiftedChannel",
    "check_equality_at_optimum",
    "lift_ib",
    "lift_ib_y",
    "lift_sib",
    "verify_ib_identities",
    "verify_sib_identities",
    "SoftPair",
    "SoftSearchConfig",
    "compose_pairs",
    "is_soft_equivariance",
    "kernel_residual",
    "perturbation_study",
    "search_soft_equivariances",
]
