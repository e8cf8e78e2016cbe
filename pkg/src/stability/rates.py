"""Service-rate vectors of deterministic rules and the drift feasibility game.

For a deterministic rule, R(q) is the service rate each queue receives in state q.
The rule passes the feasibility test when some α in the simplex makes the drift
(λ − R(q))·α negative on every state with exactly K jobs in total; the best such α
solves a zero-sum matrix game.

Example usage:
    >>> rule = greedy_rule(cmu_order(params))
    >>> result = feasibility_alpha(params, rule)
    >>> result.game_value > 0
"""

import itertools
import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from src.core.errors import LPSolverError
from src.models.instance import Assignment, QueueState, SystemParams
from src.schedulers.matching import (
    PriorityOrder,
    cmu_order,
    greedy_priority_assignment,
    max_weight_assignment,
)

logger = logging.getLogger(__name__)

Rule = Callable[[QueueState], Assignment]


def greedy_rule(order: PriorityOrder) -> Rule:
    """Deterministic rule of a static priority order."""
    return lambda state: greedy_priority_assignment(order, state)


def max_weight_rule(params: SystemParams) -> Rule:
    """Deterministic max-weight cμ rule on the true weights."""
    weights = params.weights()
    return lambda state: max_weight_assignment(weights, state)


def r_vector(params: SystemParams, rule: Rule, state: QueueState) -> np.ndarray:
    """R_i(q) = Σ_j μ_ij over the links the rule schedules for queue i at q."""
    rates = np.zeros(params.num_queues)
    for i, j in rule(state).pairs:
        rates[i] += params.mu[i][j]
    return rates


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        previous = -1
        counts = []
        for bar in bars:
            counts.append(bar - previous - 1)
            previous = bar
        counts.append(total + parts - 2 - previous)
        yield tuple(counts)


def drift_matrix(params: SystemParams, rule: Rule) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """States with K jobs in total and the payoff rows R(q) − λ."""
    states = list(compositions(params.num_servers, params.num_queues))
    rows = np.array([r_vector(params, rule, QueueState(q)) for q in states])
    return states, rows - params.lam_array


def evaluate_alpha(params: SystemParams, rule: Rule, alpha: np.ndarray) -> float:
    """min over the K-job states of (R(q) − λ)·α; positive means the drift test passes."""
    _, payoff = drift_matrix(params, rule)
    return float((payoff @ np.asarray(alpha, dtype=float)).min())


@dataclass(frozen=True)
class FeasibilityResult:
    """Value of the drift game.

    Attributes:
        game_value: max over the simplex of min over K-job states of (R(q) − λ)·α
        alpha: Optimal α when game_value > 0, else None
        alpha_positive: A strictly positive α that still passes, else None
        states: The K-job states of the game
    """

    game_value: float
    alpha: np.ndarray | None
    alpha_positive: np.ndarray | None
    states: list[tuple[int, ...]]


def feasibility_alpha(params: SystemParams, rule: Rule | None = None,
                      tolerance: float = 1e-9) -> FeasibilityResult:
    """Solve the drift game by linear programming.

    Args:
        params: Instance
        rule: Deterministic rule (default: greedy cμ priority)
        tolerance: Smallest value accepted as positive

    Raises:
        LPSolverError: If the LP solver fails
    """
    rule = rule or greedy_rule(cmu_order(params))
    states, payoff = drift_matrix(params, rule)
    U = params.num_queues

    # variables: α_1..α_U, v; maximize v subject to v ≤ payoff[q]·α for all q
    objective = np.zeros(U + 1)
    objective[-1] = -1.0
    a_ub = np.hstack([-payoff, np.ones((len(states), 1))])
    b_ub = np.zeros(len(states))
    a_eq = np.hstack([np.ones((1, U)), np.zeros((1, 1))])
    bounds = [(0.0, 1.0)] * U + [(None, None)]
    result = linprog(objective, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds,
                     method="highs")
    if not result.success:
        raise LPSolverError(f"feasibility game LP failed: {result.message}")

    alpha = np.clip(result.x[:U], 0.0, None)
    alpha = alpha / alpha.sum()
    value = float((payoff @ alpha).min())
    if value <= tolerance:
        return FeasibilityResult(game_value=value, alpha=None, alpha_positive=None, states=states)

    uniform_value = float((payoff @ np.full(U, 1.0 / U)).min())
    mix = 0.5 if uniform_value >= 0 else value / (2.0 * (value - uniform_value))
    positive = (1.0 - mix) * alpha + mix / U
    return FeasibilityResult(game_value=value, alpha=alpha, alpha_positive=positive, states=states)


def rule_disagreements(params: SystemParams, max_queue: int | None = None) -> list[tuple[int, ...]]:
    """States (each queue ≤ max_queue, default K) where greedy cμ and max-weight cμ differ."""
    limit = params.num_servers if max_queue is None else max_queue
    greedy = greedy_rule(cmu_order(params))
    weights = params.weights()
    found = []
    for q in itertools.product(range(limit + 1), repeat=params.num_queues):
        state = QueueState(q)
        positive = Assignment.of(p for p in greedy(state) if weights[p] > 0.0)
        if positive != max_weight_assignment(weights, state):
            found.append(q)
    if found:
        logger.info(f"greedy and max-weight cmu disagree on {len(found)} states")
    return found
