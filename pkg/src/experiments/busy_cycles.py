"""Busy-cycle equality of work-conserving single-server schedulers."""

import logging
import math

from src.engine.trace import busy_cycle_tail_fit
from src.engine.workload import geometric_workload_run
from src.models.instance import SystemParams
from src.models.reports import BusyCycleReport
from src.schedulers.policies import PolicyFactory

logger = logging.getLogger(__name__)


def busy_cycle_equality(
    params: SystemParams,
    schedulers: list[str | PolicyFactory],
    horizon: int,
    seed: int,
) -> BusyCycleReport:
    """Replay one geometric workload under every scheduler and compare the cycle lists.

    Raises:
        NonWorkConservingError: If a scheduler is not work-conserving
        ContractViolationError: If K != 1
    """
    logs = geometric_workload_run(params, schedulers, horizon, seed)
    reference = logs[0].cycle_lengths
    first_mismatch = None
    for log in logs[1:]:
        other = log.cycle_lengths
        if other == reference:
            continue
        index = next(
            (n for n, (a, b) in enumerate(zip(reference, other)) if a != b),
            min(len(reference), len(other)),
        )
        first_mismatch = index if first_mismatch is None else min(first_mismatch, index)

    slope, r_squared = busy_cycle_tail_fit(logs[0])
    names = [s if isinstance(s, str) else getattr(s, "__name__", "factory") for s in schedulers]
    if first_mismatch is not None:
        logger.warning(f"busy cycles differ from cycle {first_mismatch}")
    return BusyCycleReport(
        schedulers=names,
        horizon=horizon,
        seed=seed,
        equal=first_mismatch is None,
        cycle_counts=[len(log.cycle_lengths) for log in logs],
        first_mismatch=first_mismatch,
        tail_slope=None if math.isnan(slope) else slope,
        tail_r_squared=None if math.isnan(r_squared) else r_squared,
    )
