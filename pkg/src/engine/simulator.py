"""Discrete-time queue dynamics, single and coupled runs.

Slots are numbered t = 1..T and Q(1) is the initial state. Within a slot the policy
assigns servers, service outcomes are drawn, then arrivals are added:
Q(t+1) = Q(t) − served(t) + A(t).

Service uses the per-job uniform construction: the servers assigned to queue i are
ordered by descending μ_ij (ties by server index) and the n-th of them serves the job
with FCFS index n, which succeeds iff U_i(Z_i + n) > 1 − μ_ij. Two coupled systems
share arrivals, uniforms and the counter Z_i, advanced by the larger queue.

Example usage:
    >>> result = run(params, "cmu-greedy-priority", horizon=1000, seed=1)
    >>> result.cum_cost, result.busy.cycle_lengths[:3]
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.core.errors import ContractViolationError, InvalidAssignmentError
from src.core.streams import ArrivalStream, WorkloadStream
from src.engine.trace import BusyCycleLog, TraceRecord
from src.models.instance import Assignment, QueueState, SystemParams
from src.schedulers.policies import Policy, PolicyFactory, make_policy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunOptions:
    """Optional run settings.

    Attributes:
        initial_state: Q(1); defaults to the instance's initial_state or zero
        record_trace: Keep per-slot TraceRecords (paths and costs are always kept)
        discount: β in (0,1) for the discounted cost Σ β^t · slot cost
    """

    initial_state: tuple[int, ...] | None = None
    record_trace: bool = True
    discount: float | None = None


@dataclass
class RunResult:
    """One simulated path.

    Attributes:
        trace: Per-slot records (empty when not recorded)
        busy: Zero-hit slots of the path
        cum_cost: Σ_{t=1..T} Σ_i c_i Q_i(t)
        slot_costs: Slot cost per t, length T
        queue_path: T×U queue lengths at slot start
        final_state: Q(T+1)
        discounted_cost: Discounted cost when a discount was given
        idle_with_work: Slots where a single server idled with jobs waiting
        scheduler: Name of the policy that produced the path
    """

    trace: list[TraceRecord]
    busy: BusyCycleLog
    cum_cost: float
    slot_costs: np.ndarray
    queue_path: np.ndarray
    final_state: tuple[int, ...]
    discounted_cost: float | None = None
    idle_with_work: int = 0
    scheduler: str = ""
    explored_slots: list[int] = field(default_factory=list)


@dataclass
class CoupledResult:
    """Two systems driven by the same arrivals and service uniforms."""

    a: RunResult
    b: RunResult


def step(
    state: QueueState,
    assignment: Assignment,
    arrivals: tuple[int, ...],
    successes: frozenset[tuple[int, int]],
) -> QueueState:
    """Apply one slot: remove served jobs, then add arrivals.

    Raises:
        ContractViolationError: If a queue is assigned more servers than it holds jobs,
            or a success is reported for an unscheduled link
    """
    if not successes <= assignment.pairs:
        raise ContractViolationError("successes must be a subset of the assignment")
    served = [0] * len(state)
    for i in range(len(state)):
        if assignment.load(i) > state[i]:
            raise ContractViolationError(
                f"queue {i + 1} holds {state[i]} jobs but {assignment.load(i)} servers were assigned"
            )
    for i, _ in successes:
        served[i] += 1
    return QueueState(
        tuple(max(q - s, 0) + a for q, s, a in zip(state.q, served, arrivals))
    )


def serve(
    assignment: Assignment, mu: tuple[tuple[float, ...], ...], workload: WorkloadStream
) -> frozenset[tuple[int, int]]:
    """Draw the service outcomes of one slot from the job uniforms."""
    by_queue: dict[int, list[int]] = {}
    for i, j in assignment.pairs:
        by_queue.setdefault(i, []).append(j)
    successes = []
    for i, servers in by_queue.items():
        row = mu[i]
        servers.sort(key=lambda j: (-row[j], j))
        for n, j in enumerate(servers, start=1):
            if workload.job_uniform(i, n) > 1.0 - row[j]:
                successes.append((i, j))
    return frozenset(successes)


class _Path:
    """Accumulates one system's path during a simulation."""

    def __init__(self, policy: Policy, state: tuple[int, ...], record: bool, discount: float | None):
        self.policy = policy
        self.state = state
        self.record = record
        self.discount = discount
        self.trace: list[TraceRecord] = []
        self.costs: list[float] = []
        self.path: list[tuple[int, ...]] = []
        self.idle_with_work = 0
        self.explored: list[int] = []
        self.discounted = 0.0
        self.next_state = state

    def result(self) -> RunResult:
        path = np.asarray(self.path, dtype=np.int64).reshape(len(self.path), len(self.state))
        costs = np.asarray(self.costs, dtype=float)
        return RunResult(
            trace=self.trace,
            busy=BusyCycleLog.from_totals(path.sum(axis=1).tolist()),
            cum_cost=float(costs.sum()),
            slot_costs=costs,
            queue_path=path,
            final_state=self.state,
            discounted_cost=self.discounted if self.discount is not None else None,
            idle_with_work=self.idle_with_work,
            scheduler=self.policy.name,
            explored_slots=self.explored,
        )


def _simulate(
    params: SystemParams,
    policies: list[Policy],
    initial_states: list[tuple[int, ...]],
    horizon: int,
    seed: int,
    options: RunOptions,
) -> list[RunResult]:
    if horizon < 1:
        raise ContractViolationError("horizon must be at least 1")
    if options.discount is not None and not 0.0 < options.discount < 1.0:
        raise ContractViolationError("discount must lie in (0, 1)")

    cost = params.cost
    mu = params.mu
    K = params.num_servers
    arrivals_stream = ArrivalStream(seed, params.lam_array)
    workload = WorkloadStream(seed, params.num_queues)
    paths = [
        _Path(policy, tuple(state), options.record_trace, options.discount)
        for policy, state in zip(policies, initial_states)
    ]

    weight = 1.0
    for t in range(1, horizon + 1):
        arrivals = arrivals_stream.at(t)
        if options.discount is not None:
            weight *= options.discount
        for path in paths:
            state = QueueState(path.state)
            assignment, explored = path.policy.decide(t, state)
            try:
                assignment.check(state, K)
            except InvalidAssignmentError as e:
                raise InvalidAssignmentError(
                    f"scheduler '{path.policy.name}' at slot {t}, state {state.q}: {e}"
                ) from e
            successes = serve(assignment, mu, workload)
            slot_cost = float(sum(c * q for c, q in zip(cost, path.state)))

            if K == 1 and not assignment.pairs and state.total > 0:
                path.idle_with_work += 1
            if explored:
                path.explored.append(t)
            if path.record:
                path.trace.append(
                    TraceRecord(t, path.state, arrivals, assignment, successes, slot_cost, explored)
                )
            path.costs.append(slot_cost)
            path.path.append(path.state)
            path.discounted += weight * slot_cost

            path.policy.observe(assignment, successes)
            path.next_state = step(state, assignment, arrivals, successes).q
        workload.advance(*(path.state for path in paths))
        for path in paths:
            path.state = path.next_state

    return [path.result() for path in paths]


def _initial(params: SystemParams, override: tuple[int, ...] | None) -> tuple[int, ...]:
    if override is not None:
        if len(override) != params.num_queues or any(q < 0 for q in override):
            raise ContractViolationError("initial state must hold U nonnegative integers")
        return tuple(int(q) for q in override)
    return params.start_state().q


def run(
    params: SystemParams,
    scheduler: str | PolicyFactory,
    horizon: int,
    seed: int,
    options: RunOptions | None = None,
) -> RunResult:
    """Simulate one system for ``horizon`` slots.

    Args:
        params: Instance
        scheduler: Configuration string or factory (params, seed) -> Policy
        horizon: Number of slots T
        seed: Master seed of all streams
        options: Initial state, trace recording and discount

    Returns:
        The realized path with its busy-cycle log and cumulative cost

    Raises:
        InvalidAssignmentError: If the scheduler returns an infeasible assignment
    """
    options = options or RunOptions()
    policy = make_policy(scheduler, params, seed)
    logger.debug(f"run {policy.name}: T={horizon}, seed={seed}")
    (result,) = _simulate(
        params, [policy], [_initial(params, options.initial_state)], horizon, seed, options
    )
    return result


def coupled_run(
    params: SystemParams,
    scheduler_a: str | PolicyFactory,
    scheduler_b: str | PolicyFactory,
    horizon: int,
    seed: int,
    options: RunOptions | None = None,
    initial_state_b: tuple[int, ...] | None = None,
) -> CoupledResult:
    """Simulate two systems on common random numbers.

    ``options.initial_state`` sets system A; ``initial_state_b`` (default: same as A)
    sets system B.
    """
    options = options or RunOptions()
    start_a = _initial(params, options.initial_state)
    start_b = _initial(params, initial_state_b) if initial_state_b is not None else start_a
    policies = [make_policy(scheduler_a, params, seed), make_policy(scheduler_b, params, seed)]
    logger.debug(f"coupled run {policies[0].name} vs {policies[1].name}: T={horizon}, seed={seed}")
    result_a, result_b = _simulate(params, policies, [start_a, start_b], horizon, seed, options)
    return CoupledResult(a=result_a, b=result_b)
