"""Exact-arithmetic toolkit for gauge measures on the binary Cantor space.

Gauges tabulate cylinder masses at dyadic scales; trees carry cover costs
and companion gauges; three staged constructions (dense-set extension,
stem-and-reservoir saturation, perfect-tree advancement) build trees whose
cover optimum stays at or above 1 under a prescribed gauge, and the
domination layer reads zero-run behaviour off the resulting branches.
"""

from .errors import (
    GaugeForcingError,
    HorizonExhaustedError,
    InfeasibleError,
    InsufficientDataError,
    NonUniformError,
    NotPerfectError,
    ParseError,
    PreconditionError,
    RangeError,
    ValidationError,
)
from .gauges import (
    HORIZON_CAP,
    GaugeFunction,
    constant_gauge,
    dominates_on_window,
    eventually_dominates,
    finer_gauge,
    gauge_dumps,
    gauge_from_exponents,
    gauge_from_json,
    gauge_loads,
    gauge_to_json,
    hat_transform,
    identity_gauge,
    is_ratio_monotone,
    scale,
)
from .trees import (
    NODE_CAP,
    ExplicitTree,
    IndexMap,
    SplitSchedule,
    Tree,
    TreeUniformity,
    explicit_to_schedule,
    full_tree,
    index_function,
    level_counts,
    schedule_to_explicit,
    tree_from_json,
    tree_gauge,
    tree_to_json,
    uniformity_check,
    union_trees,
)
from .measure import (
    CoverSet,
    MeasureTrace,
    cover_cost,
    cover_from_json,
    cover_to_json,
    covers_tree,
    dp_cover_oracle,
    dp_cover_oracle_profile,
    level_trace,
    liminf_ratio_trace,
    refine_cover_hat,
)
from .cohen import (
    DenseOpenSet,
    DenseSetCatalog,
    build_cohen_tree,
    canonical_enumeration,
    catalog_from_json,
    custom_table_set,
    enumeration_index,
    least_extension_in,
    length_threshold_set,
    meets,
    null_cover_witness,
    one_step_extension,
    pattern_suffix_set,
    validate_catalog,
)
from .mathias import (
    MSET_MEMBER_CAP,
    DensityOperatorSpec,
    FiniteMSet,
    MathiasCondition,
    apply_operator,
    build_mathias_tree,
    condition_from_json,
    condition_to_json,
    condition_tree,
    custom_table_operator,
    extends_M,
    full_reservoir_condition,
    gap_doubling_operator,
    identity_operator,
    mset_extends,
    mset_tree,
    mset_tree_gauge,
    normalize_gauge,
    one_step_mset,
    operator_catalog_from_json,
    reachable_stems,
    sparsify_condition,
)
from .sacks import (
    FiniteSSet,
    SacksCondition,
    apply_sacks_operator,
    build_sacks_tree,
    compute_perfect_to_depth,
    custom_table_sacks_operator,
    identity_sacks_operator,
    one_step_sset,
    sacks_catalog_from_json,
    sacks_condition_from_json,
    sacks_condition_to_json,
    split_triggers,
    sset_union_tree,
    stem_of,
    thin_tree,
)
from .domination import (
    GapFunction,
    bounding_operator,
    completed_gaps,
    dominates_seq,
    domination_operator,
    escape_dense_set,
    eventually_dominates_seq,
    gap_function_from_json,
    gap_function_to_json,
    path_bound,
    pi_transform,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
