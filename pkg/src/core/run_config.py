"""Run configuration for the command line.

A run config is a JSON object holding the run fields below and, optionally, the
instance itself (``U``, ``K``, ``lambda``, ``mu``, ``cost``) instead of an
``instance`` path. Command-line flags override file values.

Example usage:
    >>> from src.core.run_config import load_run_config, merge_overrides
    >>> run_config = merge_overrides(load_run_config("sweep.json"), {"seed": 7})
    >>> params = run_config.resolve_params()
"""

import json
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.core.config import OUTPUT_DIR, config
from src.core.errors import ConfigError
from src.models.instance import SystemParams, load_instance, parse_instance

INSTANCE_KEYS = ("U", "K", "lambda", "mu", "cost", "initial_state")
DEFAULT_SCHEDULER = "cmu-greedy-priority"
DEFAULT_LEARNER = "cmuhat-parallel"
DEFAULT_HORIZON = 10_000


class RunConfig(BaseModel):
    """Everything a subcommand needs besides the instance itself."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    instance: Path | None = Field(default=None, description="Instance JSON file")
    params: SystemParams | None = Field(default=None, description="Inline instance")
    scheduler: str = DEFAULT_SCHEDULER
    learner: str = DEFAULT_LEARNER
    genie: str | None = None
    compare: list[str] = Field(default_factory=list, description="Schedulers for busy-cycle checks")
    priority: str | None = Field(default=None, description="1-based links for stability")
    horizon: int = Field(default=DEFAULT_HORIZON, ge=1)
    reps: int = Field(default_factory=lambda: config.default_reps, ge=1)
    seed: int = Field(default=0, ge=0)
    discount: float | None = Field(default=None, gt=0.0, lt=1.0)
    out: Path = OUTPUT_DIR
    truncation: int | None = Field(default=None, ge=1)
    tolerance: float = Field(default_factory=lambda: config.strict_tolerance, ge=0.0)
    strict: bool = False
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def instance_file_exists(self):
        if self.instance is not None and self.params is None and not self.instance.exists():
            raise ValueError(f"instance file not found: {self.instance}")
        return self

    def resolve_params(self) -> SystemParams:
        """The inline instance, else the one loaded from ``instance``.

        Raises:
            ConfigError: If neither is given or the file fails to load
        """
        if self.params is not None:
            return self.params
        if self.instance is None:
            raise ConfigError("no instance given (use --instance or a config file)")
        return load_instance(self.instance)


def _split_instance(raw: dict, source: str) -> dict:
    """Move inline instance keys into ``params``."""
    fields = {k: v for k, v in raw.items() if k not in INSTANCE_KEYS}
    if any(k in raw for k in INSTANCE_KEYS):
        fields["params"] = parse_instance(raw, source=source)
    return fields


def _build(fields: dict, source: str) -> RunConfig:
    try:
        return RunConfig.model_validate(fields)
    except ValidationError as e:
        raise ConfigError(f"invalid run config in {source}: {e}") from e


def load_run_config(path: Path | str) -> RunConfig:
    """Load a run config file; a relative ``instance`` path is taken from the file's folder.

    Raises:
        ConfigError: If the file is missing, unreadable or invalid
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except (json.JSONDecodeError, OSError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")

    fields = _split_instance(raw, str(path))
    instance = fields.get("instance")
    if isinstance(instance, str) and not Path(instance).is_absolute():
        fields["instance"] = path.parent / instance
    return _build(fields, str(path))


def merge_overrides(run_config: RunConfig | None, overrides: dict) -> RunConfig:
    """Apply non-None overrides on top of a config (or the defaults).

    Raises:
        ConfigError: If the merged values are invalid
    """
    merged = (
        {k: getattr(run_config, k) for k in run_config.model_fields_set} if run_config else {}
    )
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if "instance" in overrides and overrides["instance"] is not None:
        merged.pop("params", None)
    return _build(merged, "command-line flags")
