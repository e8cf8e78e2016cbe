"""Empirical link statistics and the learning cμ̂ schedulers.

Example usage:
    >>> stats = EmpiricalStats.empty(2, 2)
    >>> stats = update_stats(stats, Assignment.of([(0, 0)]), frozenset({(0, 0)}))
    >>> stats.mu_hat[0, 0]
    1.0
"""

import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from src.core.errors import ContractViolationError
from src.models.instance import Assignment, QueueState
from src.schedulers.matching import (
    ExploreSet,
    greedy_priority_assignment,
    max_weight_assignment,
    priority_from_weights,
)


class ExploitRule(StrEnum):
    """How the parallel learner exploits its estimates."""

    MAX_WEIGHT = "maxweight"
    GREEDY = "greedy"


@dataclass(frozen=True)
class EmpiricalStats:
    """Per-link sample counts and success counts.

    Attributes:
        n: U×K sample counts N_ij
        successes: U×K success counts (≤ n)
    """

    n: np.ndarray
    successes: np.ndarray

    @classmethod
    def empty(cls, num_queues: int, num_servers: int) -> "EmpiricalStats":
        shape = (num_queues, num_servers)
        return cls(np.zeros(shape, dtype=np.int64), np.zeros(shape, dtype=np.int64))

    @property
    def mu_hat(self) -> np.ndarray:
        """Empirical means; unsampled links read 0."""
        return np.divide(
            self.successes, self.n, out=np.zeros(self.n.shape, dtype=float), where=self.n > 0
        )

    @property
    def n_min(self) -> int:
        return int(self.n.min())


def update_stats(
    stats: EmpiricalStats, assignment: Assignment, successes: frozenset[tuple[int, int]]
) -> EmpiricalStats:
    """Count one sample per scheduled link and one success per served link.

    Raises:
        ContractViolationError: If a success is reported for an unscheduled link
    """
    if not successes <= assignment.pairs:
        raise ContractViolationError("successes must be a subset of the assignment")
    if not assignment.pairs:
        return stats
    n = stats.n.copy()
    wins = stats.successes.copy()
    for i, j in assignment.pairs:
        n[i, j] += 1
    for i, j in successes:
        wins[i, j] += 1
    return EmpiricalStats(n, wins)


def exploration_threshold(t: int) -> float:
    """Υ(t) = max{1, 2 ln³(t − 1)}, equal to 1 for t ≤ 2."""
    if t <= 2:
        return 1.0
    return max(1.0, 2.0 * math.log(t - 1) ** 3)


def explore_probability(t: int, num_queues: int) -> float:
    """Success probability of the explore coin B(t): min{1, 3U ln²t / t}."""
    return min(1.0, 3.0 * num_queues * math.log(t) ** 2 / t)


def cmu_hat_single(stats: EmpiricalStats, cost: np.ndarray, state: QueueState) -> Assignment:
    """Single-server cμ̂: serve the nonempty queue with the largest c_i μ̂_i.

    Ties (including the all-zero start) go to the lowest queue index, so the rule never
    idles while a job waits.
    """
    estimates = np.asarray(cost, dtype=float) * stats.mu_hat[:, 0]
    best = -1
    for i, q in enumerate(state.q):
        if q > 0 and (best < 0 or estimates[i] > estimates[best]):
            best = i
    if best < 0:
        return Assignment()
    return Assignment.of([(best, 0)])


def cmu_hat_parallel(
    t: int,
    stats: EmpiricalStats,
    cost: np.ndarray,
    state: QueueState,
    draws: tuple[float, float],
    explore: ExploreSet,
    exploit: ExploitRule = ExploitRule.MAX_WEIGHT,
) -> tuple[Assignment, bool]:
    """Conditional ε-greedy cμ̂ for parallel servers.

    Explores (uniform pick from the explore set) when N_min(t) < Υ(t) and the coin
    B(t) comes up; otherwise applies the exploit rule to c_i μ̂_ij. Exploitation is
    work-conserving: links with μ̂_ij = 0 are still assigned when nothing better is free.

    Args:
        t: Slot index (≥ 1)
        stats: Statistics before slot t
        cost: Holding costs c
        state: Queue lengths at slot start
        draws: (coin uniform, pick uniform) for this slot
        explore: Explore set of the system
        exploit: Max-weight or greedy static-priority exploitation

    Returns:
        The assignment and whether it came from exploration
    """
    if t < 1:
        raise ContractViolationError("slots are numbered from 1")
    coin, pick = draws
    wants_samples = stats.n_min < exploration_threshold(t)
    if wants_samples and coin < explore_probability(t, len(state)):
        index = min(int(pick * len(explore.assignments)), len(explore.assignments) - 1)
        return explore.schedule(index, state), True

    weights = np.asarray(cost, dtype=float)[:, None] * stats.mu_hat
    if exploit is ExploitRule.GREEDY:
        return greedy_priority_assignment(priority_from_weights(weights), state), False
    # zero-estimate links stay schedulable
    return max_weight_assignment(weights, state, keep_zero=True), False
