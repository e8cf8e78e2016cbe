"""Hierarchical static priority rules and their level-by-level ergodicity check.

A static priority rule induces a relation on queues: i ⋖ i' when i outranks i' on
every server they share. The rule is hierarchical when every server-sharing pair is
ordered this way and the relation has no cycle. Peeling minimal elements gives
levels; a queue's service at level k+1 depends only on the queues above it, so its
averaged service rate is a stationary expectation over a lower-level chain.

Example usage:
    >>> params, order = w_network()
    >>> verdict = hierarchical_verdict(params, sigma=order)
    >>> verdict.status, verdict.margins
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.core.config import config
from src.core.errors import ContractViolationError, ConvergenceError, StructureError
from src.models.capacity import capacity_contains
from src.models.instance import QueueState, SystemParams
from src.schedulers.matching import PriorityOrder, cmu_order, greedy_priority_assignment
from src.stability.stationary import (
    StationaryDist,
    product_transition,
    queue_transition,
    stationary_truncated,
)
from src.stability.verdict import (
    LevelMargin,
    StabilityVerdict,
    VerdictStatus,
    status_from_margins,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ServiceGraph:
    """Bipartite queue-server graph.

    Attributes:
        num_queues: U
        num_servers: K
        edges: Links (queue, server)
    """

    num_queues: int
    num_servers: int
    edges: frozenset[tuple[int, int]]

    @classmethod
    def from_params(cls, params: SystemParams) -> "ServiceGraph":
        return cls(params.num_queues, params.num_servers, frozenset(params.edges()))

    def servers_of(self, queue: int) -> list[int]:
        return sorted(j for i, j in self.edges if i == queue)

    def queues_of(self, server: int) -> list[int]:
        return sorted(i for i, j in self.edges if j == server)

    def is_connected(self) -> bool:
        if not self.edges:
            return self.num_queues + self.num_servers <= 1
        seen_q, seen_s = {0}, set()
        frontier = [("q", 0)]
        while frontier:
            kind, node = frontier.pop()
            if kind == "q":
                for j in self.servers_of(node):
                    if j not in seen_s:
                        seen_s.add(j)
                        frontier.append(("s", j))
            else:
                for i in self.queues_of(node):
                    if i not in seen_q:
                        seen_q.add(i)
                        frontier.append(("q", i))
        return len(seen_q) == self.num_queues and len(seen_s) == self.num_servers

    def is_tree(self) -> bool:
        return self.is_connected() and len(self.edges) == self.num_queues + self.num_servers - 1


@dataclass(frozen=True)
class HierarchyCheck:
    """Result of is_hierarchical.

    Attributes:
        hierarchical: True iff the induced queue relation is a partial order
        precedence: Pairs (i, i') with i ⋖ i' on shared servers
        counterexample: Offending queue pair when not hierarchical
        reason: Short explanation of the failure
    """

    hierarchical: bool
    precedence: frozenset[tuple[int, int]] = frozenset()
    counterexample: tuple[int, int] | None = None
    reason: str = ""


def _ranked(graph: ServiceGraph, sigma: PriorityOrder) -> PriorityOrder:
    missing = [e for e in graph.edges if e not in sigma.ranks]
    if missing:
        raise ContractViolationError(f"priority order does not rank links {sorted(missing)}")
    return sigma.restricted(graph.edges)


def is_hierarchical(graph: ServiceGraph, sigma: PriorityOrder) -> HierarchyCheck:
    """Check that sigma orders every server-sharing queue pair consistently and acyclically."""
    sigma = _ranked(graph, sigma)
    precedence: set[tuple[int, int]] = set()
    for i in range(graph.num_queues):
        for other in range(i + 1, graph.num_queues):
            shared = set(graph.servers_of(i)) & set(graph.servers_of(other))
            if not shared:
                continue
            first = {sigma.rank((i, j)) < sigma.rank((other, j)) for j in shared}
            if len(first) > 1:
                return HierarchyCheck(
                    False, counterexample=(i, other),
                    reason=f"queues {i + 1} and {other + 1} are ordered differently on shared servers",
                )
            precedence.add((i, other) if first.pop() else (other, i))

    # cycle check by repeatedly removing queues without predecessors
    remaining = set(range(graph.num_queues))
    while remaining:
        free = {q for q in remaining if not any((p, q) in precedence for p in remaining)}
        if not free:
            cycle_pair = next((p, q) for p, q in sorted(precedence) if p in remaining and q in remaining)
            return HierarchyCheck(
                False, precedence=frozenset(precedence), counterexample=cycle_pair,
                reason="the queue relation has a cycle",
            )
        remaining -= free
    return HierarchyCheck(True, precedence=frozenset(precedence))


@dataclass(frozen=True)
class KernelPartition:
    """Lower-level dependency of one link (i, j).

    Attributes:
        queue: Queue i
        server: Server j
        lower_queues: Ancestor-closed set of queues whose state decides whether j is
            free for i; empty when nothing above i competes for j
    """

    queue: int
    server: int
    lower_queues: tuple[int, ...]


@dataclass(frozen=True)
class HierarchyDecomposition:
    """Levels of a hierarchical rule.

    Attributes:
        levels: Queue sets, highest priority first
        precedence: The relation ⋖ as pairs
        kernel_partitions: Per link of a queue, the lower-level queues deciding availability
    """

    levels: list[list[int]]
    precedence: frozenset[tuple[int, int]]
    kernel_partitions: dict[tuple[int, int], KernelPartition] = field(default_factory=dict)

    def level_of(self, queue: int) -> int:
        for k, members in enumerate(self.levels, start=1):
            if queue in members:
                return k
        raise KeyError(queue)


def _ancestors(queue: int, precedence: frozenset[tuple[int, int]]) -> set[int]:
    found: set[int] = set()
    frontier = [queue]
    while frontier:
        node = frontier.pop()
        for p, q in precedence:
            if q == node and p not in found:
                found.add(p)
                frontier.append(p)
    return found


def decompose(graph: ServiceGraph, sigma: PriorityOrder) -> HierarchyDecomposition:
    """Peel minimal queues level by level and record each link's dependencies.

    Raises:
        StructureError: If sigma is not hierarchical on the graph
    """
    check = is_hierarchical(graph, sigma)
    if not check.hierarchical:
        raise StructureError(f"priority rule is not hierarchical: {check.reason}")
    sigma = _ranked(graph, sigma)

    levels: list[list[int]] = []
    remaining = set(range(graph.num_queues))
    while remaining:
        level = sorted(
            q for q in remaining if not any((p, q) in check.precedence for p in remaining)
        )
        levels.append(level)
        remaining -= set(level)

    partitions = {}
    for i in range(graph.num_queues):
        for j in graph.servers_of(i):
            competitors = {
                other for other in graph.queues_of(j)
                if other != i and sigma.rank((other, j)) < sigma.rank((i, j))
            }
            closure = set(competitors)
            for c in competitors:
                closure |= _ancestors(c, check.precedence)
            partitions[(i, j)] = KernelPartition(i, j, tuple(sorted(closure)))
    return HierarchyDecomposition(levels, check.precedence, partitions)


@dataclass(frozen=True)
class TruncationConfig:
    """Truncation settings for the lower-level chains."""

    scalar: int = 200
    joint: int = 60
    budget: int = 1_000_000
    boundary_tolerance: float = 1e-9

    @classmethod
    def from_config(cls) -> "TruncationConfig":
        return cls(
            scalar=config.scalar_truncation,
            joint=config.joint_truncation,
            budget=config.state_budget,
            boundary_tolerance=config.boundary_tolerance,
        )


def _full_state(num_queues: int, queues: tuple[int, ...], values, extra: dict[int, int]) -> QueueState:
    q = [0] * num_queues
    for queue, value in zip(queues, values):
        q[queue] = int(value)
    for queue, value in extra.items():
        q[queue] = value
    return QueueState(tuple(q))


def lower_chain_kernel(params: SystemParams, sigma: PriorityOrder, queues: tuple[int, ...]):
    """Kernel of the joint chain of an ancestor-closed queue set under the rule."""
    lam = params.lam
    mu = params.mu

    def kernel(state: tuple[int, ...]) -> dict[tuple[int, ...], float]:
        assignment = greedy_priority_assignment(
            sigma, _full_state(params.num_queues, queues, state, {})
        )
        laws = []
        for queue, value in zip(queues, state):
            rates = [mu[queue][j] for j in assignment.servers_for(queue)]
            laws.append(queue_transition(value, lam[queue], rates))
        return product_transition(laws)

    return kernel


def availability_mask(
    params: SystemParams,
    sigma: PriorityOrder,
    partition: KernelPartition,
    shape: tuple[int, ...],
) -> np.ndarray:
    """Lower-level states in which the link's server is free for a long queue."""
    mask = np.zeros(shape, dtype=bool)
    heavy = {partition.queue: params.num_servers}
    for state in np.ndindex(*shape):
        full = _full_state(params.num_queues, partition.lower_queues, state, heavy)
        mask[state] = (partition.queue, partition.server) in greedy_priority_assignment(sigma, full)
    return mask


def hierarchical_verdict(
    params: SystemParams,
    graph: ServiceGraph | None = None,
    sigma: PriorityOrder | None = None,
    truncation: TruncationConfig | None = None,
    tolerance: float | None = None,
) -> StabilityVerdict:
    """Level-by-level ergodicity check of a hierarchical static priority rule.

    For each queue i, the averaged service rate Σ_j P(j free for i) μ_ij is compared
    with λ_i, where P is the stationary law of the queues above i. Levels are processed
    in order and the check stops at the first level that fails.

    Args:
        params: Instance
        graph: Service graph (default: links with μ > 0)
        sigma: Priority order (default: cμ order)
        truncation: Lower-level chain truncation (default: configured values)
        tolerance: Width of the Boundary band (default: configured strict tolerance)

    Raises:
        StructureError: If the rule is not hierarchical
    """
    graph = graph or ServiceGraph.from_params(params)
    sigma = sigma or cmu_order(params)
    truncation = truncation or TruncationConfig.from_config()
    tolerance = config.strict_tolerance if tolerance is None else tolerance

    decomposition = decompose(graph, sigma)
    sigma = sigma.restricted(graph.edges)
    verdict_data: dict = {"method": "hierarchical", "pi_summaries": {}, "truncation": {},
                          "diagnostics": []}

    capacity = capacity_contains(params)
    if not capacity.inside:
        verdict_data["diagnostics"].append(
            f"arrival rates outside the capacity region (margin {capacity.margin:.3e})"
        )
        status = VerdictStatus.BOUNDARY if capacity.on_boundary else VerdictStatus.UNSTABLE
        return StabilityVerdict(status=status, **verdict_data)

    chains: dict[tuple[int, ...], StationaryDist] = {}
    margins: list[LevelMargin] = []
    for level_index, level in enumerate(decomposition.levels, start=1):
        for i in level:
            service = 0.0
            for j in graph.servers_of(i):
                partition = decomposition.kernel_partitions[(i, j)]
                if not partition.lower_queues:
                    service += params.mu[i][j]
                    continue
                try:
                    dist = _lower_chain(params, sigma, partition.lower_queues, truncation, chains)
                except ConvergenceError as e:
                    verdict_data["diagnostics"].append(
                        f"queue {i + 1}: lower-level chain over queues "
                        f"{[q + 1 for q in partition.lower_queues]} not solved: {e}"
                    )
                    verdict_data["per_level_margins"] = margins
                    return StabilityVerdict(status=VerdictStatus.INCONCLUSIVE, **verdict_data)
                mask = availability_mask(params, sigma, partition, dist.probs.shape)
                service += dist.mass(mask) * params.mu[i][j]
            margins.append(
                LevelMargin(level=level_index, queue=i + 1, service_rate=service,
                            arrival_rate=params.lam[i], margin=service - params.lam[i])
            )
            logger.debug(f"level {level_index} queue {i + 1}: service {service:.6f} vs {params.lam[i]}")

        status = status_from_margins([m.margin for m in margins], tolerance)
        if status is not VerdictStatus.GEOMETRICALLY_ERGODIC:
            remaining = sum(len(lv) for lv in decomposition.levels[level_index:])
            if remaining:
                verdict_data["diagnostics"].append(
                    f"stopped after level {level_index}; {remaining} queues not evaluated"
                )
            break

    for queues, dist in chains.items():
        label = ",".join(f"q{q + 1}" for q in queues)
        verdict_data["pi_summaries"][label] = dist.summary()
        verdict_data["truncation"][label] = list(dist.truncation)
    status = status_from_margins([m.margin for m in margins], tolerance)
    logger.info(f"hierarchical verdict: {status} over {len(decomposition.levels)} levels")
    return StabilityVerdict(status=status, per_level_margins=margins, **verdict_data)


def _lower_chain(
    params: SystemParams,
    sigma: PriorityOrder,
    queues: tuple[int, ...],
    truncation: TruncationConfig,
    cache: dict[tuple[int, ...], StationaryDist],
) -> StationaryDist:
    if queues not in cache:
        bound = truncation.scalar if len(queues) == 1 else truncation.joint
        cache[queues] = stationary_truncated(
            lower_chain_kernel(params, sigma, queues),
            (bound,) * len(queues),
            tol=truncation.boundary_tolerance,
            budget=truncation.budget,
        )
    return cache[queues]
