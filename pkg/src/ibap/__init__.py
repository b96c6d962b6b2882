"""Inverse best approximation property for systems of subspaces."""

from .errors import IBAPError, IllConditionedError, InputError, RefusalError
from .subspace import (
    DEFAULT_TOL,
    INF,
    InnerProduct,
    Subspace,
    Tolerance,
    complement,
    full_space,
    inclination,
    intersect,
    kernel,
    opening,
    orthonormalize,
    projector,
    subspace_sum,
    zero_subspace,
)
from .analysis import (
    ConditionReport,
    GramOperator,
    StabilityCertificate,
    SubspaceSystem,
    build_gram,
    build_summation_map,
    check_conditions,
    construct_oblique_projections,
    construct_orthogonalizing_metric,
    ibap_constant,
    reduce_operator_system,
    stability_certify,
)
from .solver import Solution, TargetTuple, solve_approx, solve_exact, solve_via_cond10
from .spectral import (
    BezoutCertificate,
    SpectralSpec,
    bezout,
    delta_lower_bounds,
    eigenspace_system,
    root_subspace_system,
    spectral_operators,
    synthesize_operator,
)
from .riesz import FamilyVerdict, VectorFamily, combine_families, ibap_from_families, riesz_bounds
from .prob import (
    DiscreteProbabilitySpace,
    PartitionSigmaAlgebra,
    bickel_alpha,
    bickel_solve,
    conditional_expectation,
    imp_check,
    imp_solve,
    interval_reduction,
    marginal_system,
    tail_predicates,
    tail_report,
    weighted_shift_check,
)

__version__ = "0.1.0"
