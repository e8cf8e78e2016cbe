"""Single-server replay of one sampled workload under several schedulers.

Jobs arrive as Bernoulli(λ_i) per slot (geometric interarrival times) and carry a
Geom(μ_i) service requirement counted in slots. A scheduler picks which queue's head
job receives the slot of work. The total backlog of work drains by one per busy slot
under any work-conserving scheduler, so every such scheduler empties the system at
exactly the same slots.
"""

import logging
import math
from collections import deque

from src.core.errors import ContractViolationError, NonWorkConservingError
from src.core.streams import ArrivalStream, StreamHandle, StreamPurpose, UniformSequence
from src.engine.trace import BusyCycleLog
from src.models.instance import QueueState, SystemParams
from src.schedulers.policies import Policy, PolicyFactory, make_policy

logger = logging.getLogger(__name__)


class RequirementStream:
    """Geom(μ_i) service requirement of the n-th job of queue i (n from 1)."""

    def __init__(self, seed: int, mu: list[float]):
        self._mu = mu
        self._uniforms = [
            UniformSequence(StreamHandle(seed, StreamPurpose.REQUIREMENT, (i,)))
            for i in range(len(mu))
        ]

    def requirement(self, queue: int, job: int) -> int:
        rate = self._mu[queue]
        if rate >= 1.0:
            return 1
        tail = 1.0 - self._uniforms[queue][job]
        return max(1, math.ceil(math.log(tail) / math.log(1.0 - rate)))


def _replay(params: SystemParams, policy: Policy, horizon: int, seed: int) -> BusyCycleLog:
    mu = [row[0] for row in params.mu]
    arrivals = ArrivalStream(seed, params.lam_array)
    requirements = RequirementStream(seed, mu)
    queues: list[deque[int]] = [deque() for _ in range(params.num_queues)]
    jobs_seen = [0] * params.num_queues
    for i, count in enumerate(params.start_state().q):
        for _ in range(count):
            jobs_seen[i] += 1
            queues[i].append(requirements.requirement(i, jobs_seen[i]))

    totals = []
    for t in range(1, horizon + 1):
        state = QueueState(tuple(len(q) for q in queues))
        totals.append(state.total)
        assignment, _ = policy.decide(t, state)
        assignment.check(state, 1)
        if state.total > 0 and not assignment.pairs:
            raise NonWorkConservingError(
                f"scheduler '{policy.name}' idled at slot {t} with state {state.q}"
            )
        successes = set()
        for i, _ in assignment.pairs:
            queues[i][0] -= 1
            if queues[i][0] == 0:
                queues[i].popleft()
                successes.add((i, 0))
        policy.observe(assignment, frozenset(successes))
        for i, arrived in enumerate(arrivals.at(t)):
            if arrived:
                jobs_seen[i] += 1
                queues[i].append(requirements.requirement(i, jobs_seen[i]))
    return BusyCycleLog.from_totals(totals)


def geometric_workload_run(
    params: SystemParams,
    schedulers: list[str | PolicyFactory],
    horizon: int,
    seed: int,
) -> list[BusyCycleLog]:
    """Replay the same geometric workload under each scheduler.

    Returns:
        One busy-cycle log per scheduler, in input order

    Raises:
        ContractViolationError: If K != 1 or some μ_i is zero
        NonWorkConservingError: If a scheduler is declared or observed non-work-conserving
    """
    if params.num_servers != 1:
        raise ContractViolationError("geometric workload replay needs a single server")
    if any(row[0] <= 0.0 for row in params.mu):
        raise ContractViolationError("every queue needs mu > 0 for a geometric requirement")

    policies = [make_policy(s, params, seed) for s in schedulers]
    for policy in policies:
        if not policy.work_conserving:
            raise NonWorkConservingError(f"scheduler '{policy.name}' is not work-conserving")
    logs = [_replay(params, policy, horizon, seed) for policy in policies]
    logger.info(
        f"replayed {horizon} slots under {len(policies)} schedulers, "
        f"{len(logs[0].cycle_lengths) if logs else 0} cycles"
    )
    return logs
