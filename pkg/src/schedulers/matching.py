"""Deterministic assignment rules: max-weight matching, static priorities, explore sets.

Example usage:
    >>> from src.schedulers.matching import cmu_order, greedy_priority_assignment
    >>> order = cmu_order(params)
    >>> greedy_priority_assignment(order, QueueState((1, 5)))
"""

from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.core.errors import AmbiguousPriorityError
from src.models.instance import Assignment, QueueState, SystemParams, format_pair, parse_pair
from src.models.validation import validate


@dataclass(frozen=True)
class PriorityOrder:
    """Static priority over links; position 0 is the highest priority.

    Attributes:
        edges: Links (queue, server) in rank order, each at most once
    """

    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("priority order lists a link twice")

    @classmethod
    def parse(cls, text: str, num_queues: int, num_servers: int) -> "PriorityOrder":
        """Parse a comma-separated list of 1-based ``i-j`` links."""
        edges = tuple(parse_pair(part) for part in text.split(",") if part.strip())
        for i, j in edges:
            if i >= num_queues or j >= num_servers:
                raise ValueError(f"link {format_pair((i, j))} outside a {num_queues}x{num_servers} system")
        if not edges:
            raise ValueError("empty priority list")
        return cls(edges)

    @cached_property
    def ranks(self) -> dict[tuple[int, int], int]:
        return {edge: position for position, edge in enumerate(self.edges)}

    def rank(self, edge: tuple[int, int]) -> int:
        return self.ranks[edge]

    def restricted(self, edges: Iterable[tuple[int, int]]) -> "PriorityOrder":
        """The same order limited to the given links."""
        keep = set(edges)
        return PriorityOrder(tuple(e for e in self.edges if e in keep))

    def to_text(self) -> str:
        return ",".join(format_pair(e) for e in self.edges)


def greedy_priority_assignment(order: PriorityOrder, state: QueueState) -> Assignment:
    """Scan links by rank; take a link when its server is free and its queue has a job left.

    Every listed link is eligible, μ = 0 links ranked last included, so a server idles
    only when none of its listed queues still holds an unassigned job.
    """
    remaining = list(state.q)
    busy: set[int] = set()
    pairs = []
    for i, j in order.edges:
        if j in busy or remaining[i] == 0:
            continue
        busy.add(j)
        remaining[i] -= 1
        pairs.append((i, j))
    return Assignment.of(pairs)


def max_weight_assignment(
    weights: np.ndarray, state: QueueState, keep_zero: bool = False
) -> Assignment:
    """Exact maximizer of Σ w_ij x_ij with one queue per server and at most Q_i servers per queue.

    Queue i is replicated min(Q_i, K) times and the copies are matched to servers by the
    assignment solver. Only strictly positive-weight pairs are returned unless
    ``keep_zero`` is set; then zero-weight pairs stay too, so with nonnegative weights
    min(Σ_i min(Q_i, K), K) servers are busy.
    """
    weights = np.asarray(weights, dtype=float)
    num_servers = weights.shape[1]
    owners = [i for i, q in enumerate(state.q) for _ in range(min(q, num_servers))]
    if not owners:
        return Assignment()
    rows, cols = linear_sum_assignment(weights[owners, :], maximize=True)
    return Assignment.of(
        (owners[r], int(c))
        for r, c in zip(rows, cols)
        if weights[owners[r], c] > 0.0 or (keep_zero and weights[owners[r], c] == 0.0)
    )


def priority_from_weights(weights: np.ndarray) -> PriorityOrder:
    """All links by descending weight, ties broken by (queue, server)."""
    weights = np.asarray(weights, dtype=float)
    U, K = weights.shape
    edges = sorted(((i, j) for i in range(U) for j in range(K)), key=lambda e: (-weights[e], e))
    return PriorityOrder(tuple(edges))


def cmu_order(params: SystemParams) -> PriorityOrder:
    """Links by descending c_i μ_ij; links with μ_ij = 0 go last in index order.

    Raises:
        AmbiguousPriorityError: If competing weights tie (Δ-gap of zero)
    """
    report = validate(params)
    if not report.is_cmu_well_defined:
        raise AmbiguousPriorityError("cmu order is ambiguous: delta gap is 0")
    weights = params.weights()
    live = sorted(params.edges(), key=lambda e: (-weights[e], e))
    dead = [
        (i, j)
        for i in range(params.num_queues)
        for j in range(params.num_servers)
        if params.mu[i][j] == 0.0
    ]
    return PriorityOrder(tuple(live + dead))


@dataclass(frozen=True)
class ExploreSet:
    """U full assignments whose union covers every link.

    Attributes:
        assignments: assignments[m][j] is the queue server j points at in assignment m
    """

    assignments: tuple[tuple[int, ...], ...]

    def schedule(self, index: int, state: QueueState) -> Assignment:
        """Assignment ``index`` restricted to nonempty queues.

        A queue pointed at by more servers than it holds jobs keeps the lowest-index
        servers; the rest idle.
        """
        remaining = list(state.q)
        pairs = []
        for j, i in enumerate(self.assignments[index]):
            if remaining[i] > 0:
                remaining[i] -= 1
                pairs.append((i, j))
        return Assignment.of(pairs)


def explore_set(num_queues: int, num_servers: int) -> ExploreSet:
    """Assignment m sends server j to queue (j + m) mod U."""
    if num_queues < 1 or num_servers < 1:
        raise ValueError("explore set needs U, K >= 1")
    return ExploreSet(
        tuple(
            tuple((j + m) % num_queues for j in range(num_servers)) for m in range(num_queues)
        )
    )
