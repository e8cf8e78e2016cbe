"""Configuration management for the cμ scheduling lab.

Numerical defaults for the stability analysis and the experiment harnesses are read
from environment variables (optionally via a ``.env`` file in the project root).

Example usage:
    >>> from src.core.config import config
    >>> config.joint_truncation
    60
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

# Project paths
PROJECT_ROOT = Path(__file__).parent.parent.parent
_env_output_dir = os.getenv("CMU_OUTPUT_DIR")
OUTPUT_DIR = Path(_env_output_dir) if _env_output_dir else PROJECT_ROOT / "output"

# Load .env file
load_dotenv(PROJECT_ROOT / ".env")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(float(raw))
    except ValueError:
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError:
        return default


@dataclass
class AnalysisConfig:
    """Defaults for truncated-chain solves, tolerances and experiments.

    Attributes:
        scalar_truncation: Initial bound N for one-dimensional chains
        joint_truncation: Initial per-dimension bound for joint lower-level chains
        state_budget: Largest truncated state space a solve may build
        boundary_tolerance: Accepted probability mass on the truncation boundary
        strict_tolerance: Width of the Boundary band around strict inequalities
        default_reps: Replications per experiment when none are requested
        log_level: Root log level used by the command line
    """

    scalar_truncation: int = 200
    joint_truncation: int = 60
    state_budget: int = 1_000_000
    boundary_tolerance: float = 1e-9
    strict_tolerance: float = 1e-9
    default_reps: int = 200
    log_level: str = "info"

    @classmethod
    def from_env(cls) -> "AnalysisConfig":
        """Load configuration from environment variables."""
        return cls(
            scalar_truncation=_env_int("CMU_SCALAR_TRUNCATION", 200),
            joint_truncation=_env_int("CMU_JOINT_TRUNCATION", 60),
            state_budget=_env_int("CMU_STATE_BUDGET", 1_000_000),
            boundary_tolerance=_env_float("CMU_BOUNDARY_TOL", 1e-9),
            strict_tolerance=_env_float("CMU_STRICT_TOL", 1e-9),
            default_reps=_env_int("CMU_DEFAULT_REPS", 200),
            log_level=os.getenv("CMU_LOG_LEVEL", os.getenv("LOG_LEVEL", "info")).lower(),
        )


def configure_logging(level: str | None = None) -> None:
    """Configure the root logger once for command-line use (stderr)."""
    name = (level or config.log_level).upper()
    logging.basicConfig(level=getattr(logging, name, logging.INFO), format=LOG_FORMAT)


def ensure_output_dir(path: Path | None = None) -> Path:
    """Create the output directory if it doesn't exist and return it."""
    target = path or OUTPUT_DIR
    target.mkdir(parents=True, exist_ok=True)
    return target


# Global config instance
config = AnalysisConfig.from_env()
