"""Simulation and inference toolkit for balanced community modulated random
recursive trees (BCMRT).

Trees of size 2n grow in pairs: at each step one node of each type arrives,
independently attaches to the other community with probability q and to a
uniformly chosen node of the selected community otherwise.  The package
provides the generator, the observable statistics, a consistent estimator of
q, two-point tests in all three observation settings, the threshold-search
clustering procedure, and exact recurrence/enumeration oracles that
cross-validate every Monte Carlo result.
"""

from .clustering import (
    ClusterResult,
    SEARCH_CAP,
    feasible_q_limit,
    prefix_alignment,
    rate_margin,
    search_colorings,
    threshold_s,
    worst_case_alignment,
)
from .errors import (
    BcmrtError,
    ConfigError,
    InfeasibleSizeError,
    ParameterError,
    SettingError,
    StructureError,
)
from .estimators import EstimateReport, Regime, estimate_q, phi
from .generator import (
    AttachmentRecord,
    GenerationHistory,
    history_to_tree,
    resample_coordinate,
    sample_history,
    sample_tree,
    split_seed,
)
from .hypotheses import (
    RiskEstimate,
    TestOutcome,
    chi2_upper_bound,
    exact_tv,
    labelled_test,
    risk_mc,
    split_product_test,
    sum_distance_test,
    tv_lower_bound,
)
from .oracles import (
    MomentTable,
    brute_force_enumerate,
    brute_force_expectation,
    degree_expectation,
    degree_table,
    delta_lower,
    efron_stein_bound,
    expected_split_product,
    expected_sum_distance,
    gamma_product,
    harmonic,
    leaf_expectation,
    level_moments,
    rooted_moments,
    subtree_second_moment_bound,
    unrooted_moments,
)
from .stats import (
    DegreeProfile,
    SplitStatistics,
    collision_count,
    cross_type_K,
    degree_counts,
    monochromatic_count,
    node_level,
    overlap,
    root_split,
    sum_distance,
)
from .tree import (
    CanonicalForm,
    ObservedTree,
    Setting,
    TimeLabelledTree,
    canonical_root_edge,
    canonical_rooted,
    canonical_unrooted,
    node_id,
    node_time,
    node_type,
    project,
    subtree_sizes,
)

__version__ = "0.1.0"
