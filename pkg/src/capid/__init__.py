"""Unsupervised capacity identification for multilinear aggregation.

The package covers the full pipeline: capacities and their interaction
representations on the subset lattice, multilinear aggregation and
ranking, slice-based variance decomposition of aggregated outputs,
synthetic correlated data, and the identification loop that equalizes the
criteria's variance contributions under a 2-additivity constraint.
"""

__version__ = "0.1.0"

from .aggregation import (
    DecisionMatrix,
    Ranking,
    WeightVector,
    matrix_from_csv,
    matrix_to_csv,
    multilinear,
    multilinear_basis,
    multilinear_pairwise,
    normalize_minmax,
    rank,
    wam,
)
from .capacity import (
    Capacity,
    FourierVector,
    InteractionVector,
    ValidationReport,
    banzhaf_from_capacity,
    banzhaf_from_fourier,
    capacity_from_banzhaf,
    capacity_from_json_dict,
    capacity_from_mobius,
    capacity_transform,
    capacity_transform_direct,
    fourier_from_banzhaf,
    interaction_transform,
    interaction_transform_direct,
    interactions_from_json_dict,
    is_two_additive,
    load_capacity_json,
    load_interactions_json,
    mobius_from_capacity,
    pair_interaction,
    power_index,
    require_valid,
    save_json,
    set_function_to_csv,
    to_json_dict,
    two_additive_capacity,
    validate,
)
from .datagen import (
    GenSpec,
    generate,
    latent_correlation,
    pearson,
    save_spec_json,
    spearman,
    spec_from_json_dict,
)
from .errors import (
    CapidError,
    DimensionError,
    DomainError,
    EstimationError,
    InfeasibleError,
    InvalidCapacityError,
)
from .experiment import ExperimentSpec, run_experiment, run_seeds, run_single
from .identification import (
    IdentificationConfig,
    IdentificationResult,
    PairConstraint,
    SliceObjective,
    feasible_interval,
    golden_section_minimize,
    identify,
    objective,
    pair_constraint_targets,
    result_to_json_dict,
    save_result_json,
)
from .kernels import BACKEND, available_backends
from .sobol import (
    HdmrTerm,
    SliceConfig,
    SobolReport,
    analytic_sobol,
    analytic_total_variance,
    cell_index,
    conditional_expectation,
    empirical_sobol,
    first_order_empirical,
    hdmr_term,
    slice_index,
    write_report_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
