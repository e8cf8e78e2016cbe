"""Regret of a learning scheduler against the cμ genie on common random numbers.

Each replication runs the learner and the genie as a coupled pair, so both see the
same arrivals and the same job uniforms; psi(T) = J(T) − J*(T) is averaged over
replications with seeds derived from the experiment seed.

Example usage:
    >>> report = regret_experiment(params, "cmuhat-single", horizons=[100, 1000], reps=20, seed=1)
    >>> report.psi, report.plateau
"""

import csv
import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.core.config import config
from src.core.errors import AmbiguousPriorityError, ConfigError
from src.core.streams import derive_seed
from src.engine.simulator import RunOptions, coupled_run
from src.models.instance import SystemParams
from src.models.reports import RegretReport, ReplicationScaling
from src.models.validation import validate

logger = logging.getLogger(__name__)


def horizon_grid(horizon: int, points: int = 8, start: int = 100) -> list[int]:
    """Log-spaced horizons ending at ``horizon``."""
    if horizon < 1:
        raise ConfigError("horizon must be at least 1")
    start = min(start, horizon)
    grid = np.unique(np.round(np.geomspace(start, horizon, points)).astype(int))
    return [int(t) for t in grid]


def default_genie(params: SystemParams, learner: str) -> str:
    """The cμ rule the learner converges to: greedy priority for K = 1 or greedy exploit."""
    if params.num_servers == 1 or learner.endswith(":greedy"):
        return "cmu-greedy-priority"
    return "cmu-maxweight"


@dataclass(frozen=True)
class _Replication:
    costs: np.ndarray
    costs_star: np.ndarray
    discounted: np.ndarray | None
    discounted_star: np.ndarray | None
    gaps: np.ndarray
    last_explore: int


def _replicate(
    params: SystemParams,
    learner: str,
    genie: str,
    horizons: tuple[int, ...],
    gap_times: tuple[int, ...],
    seed: int,
    discount: float | None,
) -> _Replication:
    horizon = horizons[-1]
    result = coupled_run(
        params, learner, genie, horizon, seed,
        RunOptions(record_trace=False, discount=discount),
    )
    index = np.asarray(horizons) - 1
    cum = np.cumsum(result.a.slot_costs)[index]
    cum_star = np.cumsum(result.b.slot_costs)[index]
    discounted = discounted_star = None
    if discount is not None:
        weights = discount ** np.arange(1, horizon + 1)
        discounted = np.cumsum(weights * result.a.slot_costs)[index]
        discounted_star = np.cumsum(weights * result.b.slot_costs)[index]
    gap_index = np.asarray(gap_times) - 1
    gaps = np.abs(result.a.queue_path[gap_index] - result.b.queue_path[gap_index]).sum(axis=1)
    explored = result.a.explored_slots
    return _Replication(cum, cum_star, discounted, discounted_star, gaps.astype(float),
                        explored[-1] if explored else 0)


def _stderr(samples: np.ndarray) -> np.ndarray:
    if samples.shape[0] < 2:
        return np.zeros(samples.shape[1])
    return samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])


def regret_experiment(
    params: SystemParams,
    learner: str = "cmuhat-parallel",
    horizons: Sequence[int] | None = None,
    reps: int | None = None,
    seed: int = 0,
    discount: float | None = None,
    genie: str | None = None,
    gap_times: Sequence[int] | None = None,
    workers: int = 1,
) -> RegretReport:
    """Estimate psi(T) on a horizon grid.

    Args:
        params: Instance (the cμ rule must be well defined)
        learner: Learner scheduler string
        horizons: Increasing horizon grid (default: log-spaced up to 10⁴)
        reps: Replications (default: configured default_reps)
        seed: Experiment seed
        discount: Optional β in (0, 1) for discounted regret
        genie: Genie scheduler string (default: see default_genie)
        gap_times: Slots at which ‖Q − Q*‖₁ is averaged (default: the horizon grid)
        workers: Worker processes for the replications

    Raises:
        ConfigError: On a learner/instance mismatch or bad grid
        AmbiguousPriorityError: If the cμ rule is not well defined
    """
    if learner.startswith("cmuhat-single") and params.num_servers != 1:
        raise ConfigError(f"learner '{learner}' needs K=1, got K={params.num_servers}")
    if not validate(params).is_cmu_well_defined:
        raise AmbiguousPriorityError("regret needs a well-defined cmu rule (delta gap is 0)")
    reps = config.default_reps if reps is None else reps
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    grid = tuple(sorted(set(horizons))) if horizons else tuple(horizon_grid(10_000))
    if grid[0] < 1:
        raise ConfigError("horizons must be at least 1")
    gaps = tuple(sorted(set(gap_times))) if gap_times else grid
    if gaps[-1] > grid[-1] or gaps[0] < 1:
        raise ConfigError("gap times must lie within the horizon")
    genie = genie or default_genie(params, learner)

    logger.info(f"regret {learner} vs {genie}: T={grid[-1]}, reps={reps}, seed={seed}")
    seeds = [derive_seed(seed, r) for r in range(reps)]
    args = (params, learner, genie, grid, gaps)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_replicate, *args, s, discount) for s in seeds]
            runs = [f.result() for f in futures]
    else:
        runs = [_replicate(*args, s, discount) for s in seeds]

    costs = np.array([r.costs for r in runs])
    costs_star = np.array([r.costs_star for r in runs])
    diffs = costs - costs_star
    discounted_psi = None
    if discount is not None:
        discounted_psi = (
            np.array([r.discounted for r in runs]) - np.array([r.discounted_star for r in runs])
        ).mean(axis=0).tolist()

    report = RegretReport(
        learner=learner,
        genie=genie,
        horizons=list(grid),
        J=costs.mean(axis=0).tolist(),
        J_star=costs_star.mean(axis=0).tolist(),
        psi=diffs.mean(axis=0).tolist(),
        stderr=_stderr(diffs).tolist(),
        gap_times=list(gaps),
        queue_gap=np.array([r.gaps for r in runs]).mean(axis=0).tolist(),
        discount=discount,
        discounted_psi=discounted_psi,
        last_explore_slots=[r.last_explore for r in runs],
        replications=reps,
        seed=seed,
    )
    logger.info(
        f"regret done: psi(T)={report.psi[-1]:.3f} ± {report.stderr[-1]:.3f}, "
        f"plateau={report.plateau}"
    )
    return report


def replication_scaling(
    params: SystemParams,
    learner: str,
    horizon: int,
    reps_list: Sequence[int] = (50, 100, 200),
    seed: int = 0,
    workers: int = 1,
) -> ReplicationScaling:
    """psi standard error at ``horizon`` for each replication count."""
    errors = []
    for reps in reps_list:
        report = regret_experiment(params, learner, [horizon], reps, seed, workers=workers)
        errors.append(report.stderr[-1])
    return ReplicationScaling(horizon=horizon, reps=list(reps_list), stderr=errors)


def write_regret_csv(report: RegretReport, path: Path | str) -> Path:
    """Columns ``T,J,J_star,psi,stderr``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["T", "J", "J_star", "psi", "stderr"])
        for row in zip(report.horizons, report.J, report.J_star, report.psi, report.stderr):
            writer.writerow([row[0], *(repr(float(x)) for x in row[1:])])
    return path
