"""Per-slot trace records, busy-cycle logs and their CSV exports."""

import csv
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.models.instance import Assignment, format_pair


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One slot of a simulated path.

    Attributes:
        t: Slot index (from 1)
        q: Queue lengths at slot start
        arrivals: 0/1 arrivals at the end of the slot
        assignment: Servers scheduled in the slot
        successes: Scheduled links that completed a job
        slot_cost: Σ_i c_i q_i
        explored: True when a learning policy explored
    """

    t: int
    q: tuple[int, ...]
    arrivals: tuple[int, ...]
    assignment: Assignment
    successes: frozenset[tuple[int, int]]
    slot_cost: float
    explored: bool = False


@dataclass(frozen=True)
class BusyCycleLog:
    """Slots at which the whole system was empty.

    Attributes:
        zero_hit_times: Increasing slots t with Q(t) = 0
        initial_segment: Slots before the first zero hit (excluded from the cycles)
    """

    zero_hit_times: tuple[int, ...]
    initial_segment: int

    @classmethod
    def from_totals(cls, totals: Iterable[int]) -> "BusyCycleLog":
        """Build from total queue length per slot, slot 1 first."""
        hits = tuple(t for t, total in enumerate(totals, start=1) if total == 0)
        return cls(zero_hit_times=hits, initial_segment=(hits[0] - 1) if hits else -1)

    @property
    def cycle_lengths(self) -> list[int]:
        return [b - a for a, b in zip(self.zero_hit_times, self.zero_hit_times[1:])]


def busy_cycle_tail_fit(log: BusyCycleLog, min_count: int = 5) -> tuple[float, float]:
    """Least-squares fit of log P(cycle > L) against L.

    Only lengths L whose tail count is at least ``min_count`` are used.

    Returns:
        (slope, R²) of the log-linear fit; (nan, nan) with fewer than 3 usable points
    """
    lengths = np.asarray(log.cycle_lengths, dtype=int)
    if lengths.size == 0:
        return float("nan"), float("nan")
    grid = np.arange(1, lengths.max() + 1)
    counts = np.array([(lengths > L).sum() for L in grid])
    keep = counts >= min_count
    if keep.sum() < 3:
        return float("nan"), float("nan")
    x = grid[keep].astype(float)
    y = np.log(counts[keep] / lengths.size)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = ((y - y.mean()) ** 2).sum()
    r_squared = 1.0 - (residual**2).sum() / total if total > 0 else 1.0
    return float(slope), float(r_squared)


def write_trace_csv(path: Path | str, trace: Sequence[TraceRecord], num_queues: int) -> None:
    """Columns ``t,q_1..q_U,a_1..a_U,assign,served,slot_cost,explored``."""
    header = (
        ["t"]
        + [f"q_{i + 1}" for i in range(num_queues)]
        + [f"a_{i + 1}" for i in range(num_queues)]
        + ["assign", "served", "slot_cost", "explored"]
    )
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for record in trace:
            served = ";".join(format_pair(p) for p in sorted(record.successes))
            writer.writerow(
                [record.t, *record.q, *record.arrivals, record.assignment.to_text(), served,
                 repr(record.slot_cost), int(record.explored)]
            )


def write_busy_cycles_csv(path: Path | str, log: BusyCycleLog) -> None:
    """Columns ``cycle_index,length``."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["cycle_index", "length"])
        for index, length in enumerate(log.cycle_lengths, start=1):
            writer.writerow([index, length])
