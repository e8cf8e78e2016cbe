"""Stability verdict schema shared by the 2×2, hierarchical and feasibility analyses."""

from enum import StrEnum
from pathlib import Path

from pydantic import BaseModel, Field, model_validator


class VerdictStatus(StrEnum):
    GEOMETRICALLY_ERGODIC = "GeometricallyErgodic"
    UNSTABLE = "Unstable"
    BOUNDARY = "Boundary"
    INCONCLUSIVE = "Inconclusive"


class LevelMargin(BaseModel):
    """Averaged service rate minus arrival rate of one queue."""

    level: int = Field(ge=1)
    queue: int = Field(ge=1, description="1-based queue index")
    service_rate: float
    arrival_rate: float
    margin: float


class StabilityVerdict(BaseModel):
    """Classification of an instance under a scheduling rule."""

    status: VerdictStatus
    method: str = Field(description="'2x2', 'hierarchical' or 'feasibility'")
    per_level_margins: list[LevelMargin] = Field(default_factory=list)
    alpha_witness: list[float] | None = None
    pi_summaries: dict[str, dict[str, float]] = Field(default_factory=dict)
    truncation: dict[str, list[int]] = Field(default_factory=dict)
    diagnostics: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def ergodic_needs_positive_margins(self):
        if self.status is VerdictStatus.GEOMETRICALLY_ERGODIC and any(
            m.margin <= 0.0 for m in self.per_level_margins
        ):
            raise ValueError("GeometricallyErgodic requires every margin to be positive")
        return self

    @property
    def margins(self) -> list[float]:
        return [m.margin for m in self.per_level_margins]


def status_from_margins(margins: list[float], tolerance: float) -> VerdictStatus:
    """Unstable if any margin < −tol, Boundary if any is within tol, else ergodic."""
    if any(m < -tolerance for m in margins):
        return VerdictStatus.UNSTABLE
    if any(abs(m) <= tolerance for m in margins):
        return VerdictStatus.BOUNDARY
    return VerdictStatus.GEOMETRICALLY_ERGODIC


def write_verdict_json(verdict: StabilityVerdict, path: Path | str) -> Path:
    """Write the full verdict report; returns the path written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(verdict.model_dump_json(indent=2), encoding="utf-8")
    return path
