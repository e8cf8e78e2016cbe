"""Empirical growth rate of queue 2 in a 2×2 instance the cμ rule cannot stabilize.

Example usage:
    >>> unstable, _ = instability_example()
    >>> report = instability_demo(unstable, horizon=20_000, reps=20, seed=5)
    >>> report.slope_mean > 0, report.excludes_zero
"""

import logging

import numpy as np
from scipy import stats

from src.core.errors import ContractViolationError
from src.core.streams import derive_seed
from src.engine.simulator import RunOptions, run
from src.models.capacity import capacity_contains
from src.models.instance import SystemParams
from src.models.reports import InstabilityReport
from src.stability.two_by_two import classify_2x2
from src.stability.verdict import VerdictStatus

logger = logging.getLogger(__name__)


def instability_demo(
    params: SystemParams,
    horizon: int,
    reps: int,
    seed: int,
    scheduler: str = "cmu-greedy-priority",
    require_unstable: bool = True,
) -> InstabilityReport:
    """Fit the slope of Q2(t) over the last half of the horizon.

    Args:
        params: 2×2 instance with queue-1 priority structure
        horizon: Slots per replication (at least 4)
        reps: Replications
        seed: Experiment seed
        scheduler: Rule to simulate
        require_unstable: Reject instances the analysis does not classify Unstable

    Raises:
        ContractViolationError: If the instance is not Unstable (when required) or the
            horizon is too short to fit
    """
    if horizon < 4 or reps < 1:
        raise ContractViolationError("instability fit needs horizon >= 4 and reps >= 1")
    verdict = classify_2x2(params)
    if require_unstable and verdict.status is not VerdictStatus.UNSTABLE:
        raise ContractViolationError(f"instance is {verdict.status}, not Unstable")
    levels = verdict.per_level_margins
    threshold = levels[1].service_rate if len(levels) == 2 else None

    start = horizon // 2
    times = np.arange(start + 1, horizon + 1, dtype=float)
    slopes, stderrs, finals = [], [], []
    for r in range(reps):
        result = run(params, scheduler, horizon, derive_seed(seed, r), RunOptions(record_trace=False))
        q2 = result.queue_path[start:, 1].astype(float)
        fit = stats.linregress(times, q2)
        slopes.append(float(fit.slope))
        stderrs.append(float(fit.stderr))
        finals.append(int(result.queue_path[-1, 1]))

    slope_mean = float(np.mean(slopes))
    # per-replication OLS interval
    critical = stats.t.ppf(0.975, times.size - 2)
    growing = sum(s - critical * se > 0.0 for s, se in zip(slopes, stderrs))
    if reps > 1:
        half_width = stats.t.ppf(0.975, reps - 1) * np.std(slopes, ddof=1) / np.sqrt(reps)
    else:
        half_width = critical * stderrs[0]
    b = slope_mean / 2.0
    fraction = float(np.mean([q > b * horizon for q in finals]))

    report = InstabilityReport(
        scheduler=scheduler,
        horizon=horizon,
        replications=reps,
        seed=seed,
        slopes=slopes,
        slope_stderrs=stderrs,
        slope_mean=slope_mean,
        ci_low=slope_mean - float(half_width),
        ci_high=slope_mean + float(half_width),
        b=b,
        fraction_above=fraction,
        significant_growth=int(growing),
        threshold=threshold,
        capacity_inside=capacity_contains(params).inside,
    )
    logger.info(
        f"instability demo: slope {slope_mean:.5f} "
        f"[{report.ci_low:.5f}, {report.ci_high:.5f}], verdict {verdict.status}"
    )
    return report
