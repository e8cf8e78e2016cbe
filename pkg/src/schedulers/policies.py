"""Scheduling policies as run-owned objects, selected by configuration string.

Supported strings:
    cmu-maxweight                 max-weight matching on the true c_i μ_ij
    cmu-greedy-priority           greedy static priority in cμ order
    cmuhat-single                 single-server cμ̂ learner (K = 1)
    cmuhat-parallel[:greedy]      conditional ε-greedy cμ̂ learner
    static-priority:<links>       greedy static priority over 1-based ``i-j`` links

Example usage:
    >>> policy = build_policy("cmuhat-parallel", params, seed=3)
    >>> assignment, explored = policy.decide(1, params.start_state())
"""

from collections.abc import Callable
from typing import Protocol

import numpy as np

from src.core.errors import ConfigError
from src.core.streams import ExploreDraws
from src.models.instance import Assignment, QueueState, SystemParams
from src.schedulers.learning import (
    EmpiricalStats,
    ExploitRule,
    cmu_hat_parallel,
    cmu_hat_single,
    update_stats,
)
from src.schedulers.matching import (
    PriorityOrder,
    cmu_order,
    explore_set,
    greedy_priority_assignment,
    max_weight_assignment,
)

SCHEDULER_NAMES = (
    "cmu-maxweight",
    "cmu-greedy-priority",
    "cmuhat-single",
    "cmuhat-parallel",
    "static-priority:<links>",
)


class Policy(Protocol):
    """A scheduler instance owned by exactly one run."""

    name: str
    work_conserving: bool

    def decide(self, t: int, state: QueueState) -> tuple[Assignment, bool]:
        """Assignment for slot t and whether it was an exploration step."""
        ...

    def observe(self, assignment: Assignment, successes: frozenset[tuple[int, int]]) -> None:
        """Feedback after the slot's service outcomes are known."""
        ...


PolicyFactory = Callable[[SystemParams, int], Policy]


class StaticPriorityPolicy:
    """Greedy static priority rule."""

    def __init__(self, order: PriorityOrder, num_queues: int, name: str = "static-priority"):
        self.order = order
        self.name = name
        covered = {i for i, _ in order.edges}
        self.work_conserving = covered == set(range(num_queues))

    def decide(self, t: int, state: QueueState) -> tuple[Assignment, bool]:
        return greedy_priority_assignment(self.order, state), False

    def observe(self, assignment: Assignment, successes: frozenset[tuple[int, int]]) -> None:
        pass

    def rule(self, state: QueueState) -> Assignment:
        return greedy_priority_assignment(self.order, state)


class MaxWeightPolicy:
    """Max-weight matching on fixed weights; decisions cached per capped state."""

    def __init__(self, weights: np.ndarray, name: str = "cmu-maxweight"):
        self.weights = np.asarray(weights, dtype=float)
        self.name = name
        self.work_conserving = bool((self.weights.max(axis=1) > 0.0).all())
        self._cache: dict[tuple[int, ...], Assignment] = {}

    def rule(self, state: QueueState) -> Assignment:
        cap = self.weights.shape[1]
        key = tuple(min(q, cap) for q in state.q)
        assignment = self._cache.get(key)
        if assignment is None:
            assignment = max_weight_assignment(self.weights, QueueState(key))
            self._cache[key] = assignment
        return assignment

    def decide(self, t: int, state: QueueState) -> tuple[Assignment, bool]:
        return self.rule(state), False

    def observe(self, assignment: Assignment, successes: frozenset[tuple[int, int]]) -> None:
        pass


class CmuHatSinglePolicy:
    """Single-server learner: cμ rule on empirical means, always work-conserving."""

    work_conserving = True

    def __init__(self, params: SystemParams, name: str = "cmuhat-single"):
        if params.num_servers != 1:
            raise ConfigError(f"{name} needs K = 1, instance has K = {params.num_servers}")
        self.name = name
        self.cost = params.cost_array
        self.stats = EmpiricalStats.empty(params.num_queues, 1)

    def decide(self, t: int, state: QueueState) -> tuple[Assignment, bool]:
        return cmu_hat_single(self.stats, self.cost, state), False

    def observe(self, assignment: Assignment, successes: frozenset[tuple[int, int]]) -> None:
        self.stats = update_stats(self.stats, assignment, successes)


class CmuHatParallelPolicy:
    """Conditional ε-greedy learner; may idle servers while exploring."""

    work_conserving = False

    def __init__(
        self,
        params: SystemParams,
        seed: int,
        exploit: ExploitRule = ExploitRule.MAX_WEIGHT,
        name: str = "cmuhat-parallel",
    ):
        self.name = name
        self.cost = params.cost_array
        self.exploit = exploit
        self.explore = explore_set(params.num_queues, params.num_servers)
        self.stats = EmpiricalStats.empty(params.num_queues, params.num_servers)
        self._draws = ExploreDraws(seed)

    def decide(self, t: int, state: QueueState) -> tuple[Assignment, bool]:
        return cmu_hat_parallel(
            t, self.stats, self.cost, state, self._draws.at(t), self.explore, self.exploit
        )

    def observe(self, assignment: Assignment, successes: frozenset[tuple[int, int]]) -> None:
        self.stats = update_stats(self.stats, assignment, successes)


def build_policy(scheduler: str, params: SystemParams, seed: int) -> Policy:
    """Instantiate a policy from its configuration string.

    Raises:
        ConfigError: If the string is unknown or does not fit the instance
    """
    name, _, option = scheduler.strip().partition(":")
    try:
        if name == "cmu-maxweight" and not option:
            return MaxWeightPolicy(params.weights(), name=scheduler)
        if name == "cmu-greedy-priority" and not option:
            return StaticPriorityPolicy(cmu_order(params), params.num_queues, name=scheduler)
        if name == "cmuhat-single" and not option:
            return CmuHatSinglePolicy(params, name=scheduler)
        if name == "cmuhat-parallel":
            exploit = ExploitRule(option) if option else ExploitRule.MAX_WEIGHT
            return CmuHatParallelPolicy(params, seed, exploit=exploit, name=scheduler)
        if name == "static-priority" and option:
            order = PriorityOrder.parse(option, params.num_queues, params.num_servers)
            return StaticPriorityPolicy(order, params.num_queues, name=scheduler)
    except ValueError as e:
        raise ConfigError(f"scheduler '{scheduler}': {e}") from e
    raise ConfigError(
        f"unknown scheduler '{scheduler}'; expected one of {', '.join(SCHEDULER_NAMES)}"
    )


def make_policy(scheduler: "str | PolicyFactory", params: SystemParams, seed: int) -> Policy:
    """Resolve a scheduler string or factory into a fresh policy for one run."""
    if isinstance(scheduler, str):
        return build_policy(scheduler, params, seed)
    return scheduler(params, seed)
