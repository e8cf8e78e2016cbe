"""Free-exploration diagnostics: the event floor θ and when a learner stops exploring.

At the start of a busy cycle, queue i collects a fresh sample on every server if over K
slots only queue i receives jobs and its first K − 1 jobs all stay in service. θ is the
smallest per-queue probability of that event.
"""

import logging
import math

import numpy as np

from src.core.errors import ContractViolationError
from src.core.streams import derive_seed
from src.engine.simulator import RunOptions, RunResult, run
from src.models.instance import SystemParams
from src.models.reports import ExplorationFrequency, NoExploreOnset
from src.schedulers.learning import exploration_threshold

logger = logging.getLogger(__name__)


def event_probabilities(params: SystemParams) -> list[float]:
    """Per-queue probability (λ_i Π_{i'≠i}(1−λ_{i'}))^K (Π_j (1−μ_ij))^{K−1}."""
    lam = params.lam_array
    mu = params.mu_array
    K = params.num_servers
    idle = np.prod(1.0 - lam)
    probs = []
    for i in range(params.num_queues):
        only_i = lam[i] * idle / (1.0 - lam[i])
        probs.append(float(only_i**K * np.prod(1.0 - mu[i]) ** (K - 1)))
    return probs


def free_exploration_rate(params: SystemParams) -> float:
    """θ = the smallest per-queue free-exploration event probability."""
    return min(event_probabilities(params))


def cycle_start_probabilities(params: SystemParams) -> list[float]:
    """Per-queue probability of the event under the cμ rule.

    With only queue i holding k jobs, the cμ rule puts them on queue i's k fastest
    servers, so only those k links must fail in each of the first K − 1 service slots.
    Each entry is at least the matching ``event_probabilities`` entry.
    """
    lam = params.lam_array
    mu = params.mu_array
    K = params.num_servers
    idle = np.prod(1.0 - lam)
    probs = []
    for i in range(params.num_queues):
        only_i = lam[i] * idle / (1.0 - lam[i])
        fastest = np.sort(mu[i])[::-1]
        stay = math.prod(float(np.prod(1.0 - fastest[:k])) for k in range(1, K))
        probs.append(float(only_i**K * stay))
    return probs


def _cycle_start_events(
    result: RunResult, num_queues: int, num_servers: int
) -> tuple[int, list[int]]:
    """Busy-cycle starts with a full K-slot window and per-queue event counts."""
    trace = result.trace
    starts = 0
    hits = [0] * num_queues
    for t0 in result.busy.zero_hit_times:
        if t0 + num_servers - 1 > len(trace):
            break
        starts += 1
        window = trace[t0 - 1 : t0 - 1 + num_servers]
        first = window[0].arrivals
        if sum(first) != 1:
            continue
        i = first.index(1)
        if any(record.arrivals != first for record in window[1:]):
            continue
        if any(record.successes for record in window[1:]):
            continue
        hits[i] += 1
    return starts, hits


def exploration_event_frequency(
    params: SystemParams,
    cycles: int = 20_000,
    seed: int = 0,
    horizon: int = 10_000,
    scheduler: str = "cmu-maxweight",
) -> ExplorationFrequency:
    """Frequency of each queue's free-exploration event at simulated busy-cycle starts.

    Replications of ``horizon`` slots are run until ``cycles`` busy-cycle starts have
    been seen. The event is read off the trace: over the first K slots after an empty
    slot only queue i receives jobs, and none of its jobs completes in slots 2..K.

    Args:
        params: Instance
        cycles: Busy-cycle starts to observe
        seed: Experiment seed
        horizon: Slots per replication
        scheduler: Work-conserving cμ rule that runs the system

    Raises:
        ContractViolationError: If cycles or horizon is not positive
    """
    if cycles < 1 or horizon < params.num_servers:
        raise ContractViolationError("cycles must be positive and horizon at least K")
    U, K = params.num_queues, params.num_servers
    floor = event_probabilities(params)
    exact = cycle_start_probabilities(params)

    seen = 0
    hits = np.zeros(U, dtype=np.int64)
    rep = 0
    while seen < cycles:
        result = run(params, scheduler, horizon, derive_seed(seed, rep), RunOptions())
        starts, counts = _cycle_start_events(result, U, K)
        seen += starts
        hits += counts
        rep += 1
        if rep > 1000 and seen == 0:
            raise ContractViolationError("the system never empties; no busy cycles to observe")

    freqs = (hits / seen).tolist()
    errors = [math.sqrt(p * (1.0 - p) / seen) for p in exact]
    within = all(abs(f - p) <= 3.0 * se for f, p, se in zip(freqs, exact, errors))
    above = all(f >= p - 3.0 * se for f, p, se in zip(freqs, floor, errors))
    logger.info(f"{seen} busy-cycle starts over {rep} runs; event frequency {freqs}")
    return ExplorationFrequency(
        theta=min(floor),
        per_queue_theta=floor,
        cycle_probability=exact,
        frequency=freqs,
        stderr=errors,
        cycles=seen,
        replications=rep,
        within_three_se=within,
        above_floor=above,
    )


def no_explore_onset(result: RunResult, params: SystemParams, samples: int = 100) -> NoExploreOnset:
    """Last exploration slot and the N_min(t) path rebuilt from the trace.

    Raises:
        ContractViolationError: If the run kept no trace
    """
    if not result.trace:
        raise ContractViolationError("no_explore_onset needs a recorded trace")
    horizon = result.trace[-1].t
    step = max(1, horizon // samples)
    sample_times = set(range(1, horizon + 1, step)) | {horizon}
    counts = np.zeros((params.num_queues, params.num_servers), dtype=np.int64)
    times, n_min = [], []
    explore_count = 0
    last = 0
    for record in result.trace:
        if record.t in sample_times:
            times.append(record.t)
            n_min.append(int(counts.min()))
        for i, j in record.assignment.pairs:
            counts[i, j] += 1
        if record.explored:
            explore_count += 1
            last = record.t
    return NoExploreOnset(
        horizon=horizon,
        last_explore_slot=last,
        explore_count=explore_count,
        sample_times=times,
        n_min=n_min,
        final_n_min=int(counts.min()),
        final_threshold=exploration_threshold(horizon),
    )


def exploration_onset_study(
    params: SystemParams,
    horizon: int,
    reps: int,
    seed: int,
    scheduler: str = "cmuhat-parallel",
) -> list[NoExploreOnset]:
    """no_explore_onset over independent replications of the learner."""
    onsets = []
    for r in range(reps):
        result = run(params, scheduler, horizon, derive_seed(seed, r), RunOptions())
        onsets.append(no_explore_onset(result, params))
    ceased = sum(o.ceased_before_half for o in onsets)
    logger.info(f"exploration ceased before T/2 in {ceased}/{reps} replications")
    return onsets
