"""Scheduling rules: cμ matching, static priorities and the learning cμ̂ policies."""

from src.schedulers.learning import (
    EmpiricalStats,
    ExploitRule,
    cmu_hat_parallel,
    cmu_hat_single,
    exploration_threshold,
    explore_probability,
    update_stats,
)
from src.schedulers.matching import (
    ExploreSet,
    PriorityOrder,
    cmu_order,
    explore_set,
    greedy_priority_assignment,
    max_weight_assignment,
    priority_from_weights,
)
from src.schedulers.policies import (
    SCHEDULER_NAMES,
    CmuHatParallelPolicy,
    CmuHatSinglePolicy,
    MaxWeightPolicy,
    Policy,
    PolicyFactory,
    StaticPriorityPolicy,
    build_policy,
    make_policy,
)

__all__ = [
    # Deterministic rules
    "PriorityOrder",
    "greedy_priority_assignment",
    "max_weight_assignment",
    "priority_from_weights",
    "cmu_order",
    "ExploreSet",
    "explore_set",
    # Learning
    "EmpiricalStats",
    "ExploitRule",
    "update_stats",
    "exploration_threshold",
    "explore_probability",
    "cmu_hat_single",
    "cmu_hat_parallel",
    # Policies
    "Policy",
    "PolicyFactory",
    "StaticPriorityPolicy",
    "MaxWeightPolicy",
    "CmuHatSinglePolicy",
    "CmuHatParallelPolicy",
    "build_policy",
    "make_policy",
    "SCHEDULER_NAMES",
]
