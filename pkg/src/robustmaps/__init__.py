"""Knockout-robust stochastic maps on finite state spaces."""

from .errors import (
    EmptyDistribution,
    EnumerationTimeout,
    InconsistentStructure,
    IndexMismatch,
    InvalidCardinality,
    InvalidK,
    InvalidNode,
    InvalidValue,
    InvalidWitness,
    NonPositiveEntry,
    NotBinary,
    NotCoherent,
    NotConstantOnBlock,
    NotSaturated,
    RobustmapsError,
    StateSpaceTooLarge,
)
from .spaces import CylinderSet, InputState, StateSpace, make_state_space
from .specs import (
    DeltaFamily,
    RobustnessSpec,
    coherent_closure,
    delta_family,
    is_coherent,
    is_saturated,
    make_canalyzing_spec,
    make_nested_canalyzing_spec,
    make_rk_spec,
    r_min,
    spec_from_json,
    spec_to_json,
)
from .structures import (
    RobustnessGraph,
    RobustnessStructure,
    build_graph,
    check_product_structure,
    components_of_set,
    connected_components,
    enumerate_maximal_structures,
    export_dot,
    fink_maximal_structures,
    is_maximal,
    max_singleton_code_size,
    sample_maximal_structures,
    smallk_connectivity_check,
    structure_from_blocks,
    structure_from_json,
    structure_size_bound,
    structure_to_json,
    symmetry_classes,
)
from .kernels import (
    DeterministicMap,
    FunctionalModalities,
    StochasticMap,
    constant_map,
    factorize_through_structure,
    from_function,
    hat_kappa,
    is_canalyzing,
    is_r_canalyzing,
    is_r_robust_map,
    is_r_robust_modalities,
    kernel_from_json,
    kernel_to_json,
    modalities_from_hat,
    modalities_from_json,
    modalities_to_json,
    robust_modalities_from_blocks,
    uniform_map,
)
from .gibbs import (
    GibbsPotentials,
    InteractionBasis,
    basis_conditions_hold,
    delta_interaction_check,
    extract_base,
    geometric_mean_extension_general,
    geometric_mean_extension_k,
    gibbs_to_modalities,
    interaction_order,
    is_robust_via_potentials,
    is_tilde_member,
    knockout_residual,
    modalities_from_basis,
    moebius_potentials,
    potentials_from_json,
    potentials_to_json,
    project_to_tilde_k,
    tilde_interaction_basis,
    with_gauge_shift,
)
from .neural import (
    ThresholdParams,
    renormalized_threshold_modalities,
    threshold_limit,
    threshold_modalities,
)
from .joint import (
    ComponentParams,
    ConditionalKernel,
    JointDistribution,
    check_ci,
    component_membership,
    conditional_kernel,
    epsilon_approximation,
    fibers_proportional,
    is_r_robust_distribution,
    joint_from,
    joint_from_json,
    joint_to_json,
    random_component_params,
    random_robust_distribution,
    sample_from_component,
    support_structure,
    tv_distance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
