"""Analytic stability classification: drift game, 2×2 regions and hierarchical rules."""

from src.stability.hierarchy import (
    HierarchyCheck,
    HierarchyDecomposition,
    KernelPartition,
    ServiceGraph,
    TruncationConfig,
    availability_mask,
    decompose,
    hierarchical_verdict,
    is_hierarchical,
)
from src.stability.networks import (
    MNetworkResult,
    three_level_network,
    generalized_n_network,
    instability_example,
    m_network,
    m_network_counterexample,
    n_network,
    w_network,
)
from src.stability.rates import (
    FeasibilityResult,
    compositions,
    evaluate_alpha,
    feasibility_alpha,
    greedy_rule,
    max_weight_rule,
    r_vector,
    rule_disagreements,
)
from src.stability.stationary import (
    StationaryDist,
    gth_solve,
    queue_transition,
    single_queue_kernel,
    stationary_1x2_closed_form,
    stationary_truncated,
)
from src.stability.two_by_two import (
    NNetworkRegion,
    classify_2x2,
    classify_two_queue_priority,
    n_network_region,
)
from src.stability.verdict import (
    LevelMargin,
    StabilityVerdict,
    VerdictStatus,
    write_verdict_json,
)

__all__ = [
    # Stationary laws
    "StationaryDist",
    "gth_solve",
    "queue_transition",
    "single_queue_kernel",
    "stationary_truncated",
    "stationary_1x2_closed_form",
    # Drift feasibility
    "r_vector",
    "compositions",
    "greedy_rule",
    "max_weight_rule",
    "evaluate_alpha",
    "feasibility_alpha",
    "FeasibilityResult",
    "rule_disagreements",
    # Verdicts
    "VerdictStatus",
    "LevelMargin",
    "StabilityVerdict",
    "write_verdict_json",
    "classify_2x2",
    "classify_two_queue_priority",
    "n_network_region",
    "NNetworkRegion",
    # Hierarchical rules
    "ServiceGraph",
    "HierarchyCheck",
    "HierarchyDecomposition",
    "KernelPartition",
    "TruncationConfig",
    "is_hierarchical",
    "decompose",
    "availability_mask",
    "hierarchical_verdict",
    # Networks
    "instability_example",
    "w_network",
    "n_network",
    "generalized_n_network",
    "three_level_network",
    "m_network",
    "m_network_counterexample",
    "MNetworkResult",
]
