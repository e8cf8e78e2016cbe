"""Report schemas of the experiment harnesses and their JSON export."""

import json
import math
from pathlib import Path

from pydantic import BaseModel, Field, model_validator


class RegretReport(BaseModel):
    """Learner vs genie costs on a horizon grid, averaged over coupled replications."""

    learner: str
    genie: str
    horizons: list[int]
    J: list[float] = Field(description="Mean cumulative cost of the learner")
    J_star: list[float] = Field(description="Mean cumulative cost of the genie")
    psi: list[float] = Field(description="J − J_star per horizon")
    stderr: list[float] = Field(description="Standard error of psi across replications")
    gap_times: list[int] = Field(default_factory=list)
    queue_gap: list[float] = Field(default_factory=list, description="Mean ‖Q(t) − Q*(t)‖₁")
    discount: float | None = None
    discounted_psi: list[float] | None = None
    last_explore_slots: list[int] = Field(default_factory=list)
    replications: int = Field(ge=1)
    seed: int

    @model_validator(mode="after")
    def psi_matches_costs(self):
        n = len(self.horizons)
        if not (len(self.J) == len(self.J_star) == len(self.psi) == len(self.stderr) == n):
            raise ValueError("per-horizon columns must match the horizon grid")
        for j, j_star, psi in zip(self.J, self.J_star, self.psi):
            if abs((j - j_star) - psi) > 1e-6 * max(1.0, abs(j)):
                raise ValueError("psi must equal J − J_star")
        return self

    @property
    def plateau_delta(self) -> float:
        """psi at the last grid point minus psi at the one before."""
        if len(self.psi) < 2:
            return 0.0
        return self.psi[-1] - self.psi[-2]

    @property
    def plateau_se(self) -> float:
        if len(self.stderr) < 2:
            return 0.0
        return math.hypot(self.stderr[-1], self.stderr[-2])

    @property
    def plateau(self) -> bool:
        """psi at the last two grid points agrees within two pooled standard errors."""
        return abs(self.plateau_delta) <= 2.0 * self.plateau_se


class ReplicationScaling(BaseModel):
    """Standard error of psi at one horizon for several replication counts."""

    horizon: int
    reps: list[int]
    stderr: list[float]

    @property
    def scaled(self) -> list[float]:
        """stderr · √reps; roughly constant when replications are independent."""
        return [se * math.sqrt(r) for se, r in zip(self.stderr, self.reps)]


class InstabilityReport(BaseModel):
    """Growth of Q2 under the cμ rule over the last half of the horizon."""

    scheduler: str
    horizon: int
    replications: int
    seed: int
    slopes: list[float] = Field(description="OLS slope of Q2(t) on t per replication")
    slope_stderrs: list[float]
    slope_mean: float
    ci_low: float
    ci_high: float
    b: float = Field(description="Half the mean slope")
    fraction_above: float = Field(description="Share of replications with Q2(T) > b·T")
    significant_growth: int = Field(
        default=0, description="Replications whose own 95% slope interval lies above 0"
    )
    threshold: float | None = Field(default=None, description="Stability bound on λ2")
    capacity_inside: bool

    @property
    def excludes_zero(self) -> bool:
        return self.ci_low > 0.0 or self.ci_high < 0.0


class BusyCycleReport(BaseModel):
    """Busy-cycle lists of several schedulers on one sampled workload."""

    schedulers: list[str]
    horizon: int
    seed: int
    equal: bool
    cycle_counts: list[int]
    first_mismatch: int | None = Field(default=None, description="First cycle index that differs")
    tail_slope: float | None = None
    tail_r_squared: float | None = None


class ExplorationFrequency(BaseModel):
    """Observed frequency of the free-exploration event at busy-cycle starts, per queue."""

    theta: float
    per_queue_theta: list[float] = Field(description="Event floor with every server failing")
    cycle_probability: list[float] = Field(description="Event probability under the cμ rule")
    frequency: list[float]
    stderr: list[float]
    cycles: int = Field(ge=1)
    replications: int = Field(ge=1)
    within_three_se: bool = Field(description="Frequency within 3 SE of cycle_probability")
    above_floor: bool = Field(description="Frequency not 3 SE below per_queue_theta")


class NoExploreOnset(BaseModel):
    """When a parallel learner stopped exploring."""

    horizon: int
    last_explore_slot: int = Field(description="0 when the learner never explored")
    explore_count: int
    sample_times: list[int]
    n_min: list[int] = Field(description="N_min before each sample time")
    final_n_min: int
    final_threshold: float

    @property
    def ceased_before_half(self) -> bool:
        return self.last_explore_slot < self.horizon / 2

    @property
    def enough_samples(self) -> bool:
        return self.final_n_min >= self.final_threshold


def write_report_json(report: BaseModel, path: Path | str) -> Path:
    """Write a report as indented JSON; returns the path written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(report.model_dump(mode="json"), indent=2, ensure_ascii=False),
        encoding="utf-8",
    )
    return path
