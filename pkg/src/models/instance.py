"""Problem-instance types: system parameters, queue states and slot assignments.

Instances are stored as JSON with the keys ``U``, ``K``, ``lambda``, ``mu`` (one row
per queue) and ``cost``; an optional ``initial_state`` gives Q(1).

Example usage:
    >>> from src.models.instance import SystemParams, QueueState, Assignment
    >>> params = SystemParams.from_arrays([0.4, 0.3], [[0.7, 0.1], [0.1, 0.6]], [1.0, 1.0])
    >>> Assignment.of([(0, 0), (1, 1)]).check(QueueState((1, 1)), params.num_servers)
"""

import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.core.errors import ConfigError, InvalidAssignmentError

# Largest instance the exact LP/matching code paths are sized for
MAX_DIMENSION = 16


class SystemParams(BaseModel):
    """Arrival rates, service-rate matrix and holding costs of one instance."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    num_queues: int = Field(alias="U", ge=1)
    num_servers: int = Field(alias="K", ge=1)
    lam: tuple[float, ...] = Field(alias="lambda", description="Bernoulli arrival rate per queue")
    mu: tuple[tuple[float, ...], ...] = Field(description="Success probability, row = queue")
    cost: tuple[float, ...] = Field(description="Holding cost per job per slot")
    initial_state: tuple[int, ...] | None = None

    @model_validator(mode="after")
    def check_shapes_and_ranges(self):
        U, K = self.num_queues, self.num_servers
        if len(self.lam) != U:
            raise ValueError(f"lambda has {len(self.lam)} entries, expected U={U}")
        if len(self.cost) != U:
            raise ValueError(f"cost has {len(self.cost)} entries, expected U={U}")
        if len(self.mu) != U or any(len(row) != K for row in self.mu):
            raise ValueError(f"mu must be a {U}x{K} matrix")
        for i, rate in enumerate(self.lam):
            if not (math.isfinite(rate) and 0.0 <= rate < 1.0):
                raise ValueError(f"lambda[{i + 1}]={rate} outside [0, 1)")
        for i, row in enumerate(self.mu):
            for j, rate in enumerate(row):
                if not (math.isfinite(rate) and 0.0 <= rate <= 1.0):
                    raise ValueError(f"mu[{i + 1}][{j + 1}]={rate} outside [0, 1]")
        for i, c in enumerate(self.cost):
            if not (math.isfinite(c) and c > 0.0):
                raise ValueError(f"cost[{i + 1}]={c} must be positive")
        if self.initial_state is not None:
            if len(self.initial_state) != U or any(q < 0 for q in self.initial_state):
                raise ValueError("initial_state must hold U nonnegative integers")
        return self

    @classmethod
    def from_arrays(
        cls,
        lam: Sequence[float],
        mu: Sequence[Sequence[float]],
        cost: Sequence[float],
        initial_state: Sequence[int] | None = None,
    ) -> "SystemParams":
        """Build an instance from plain sequences or numpy arrays."""
        mu_rows = tuple(tuple(float(x) for x in row) for row in mu)
        return cls(
            num_queues=len(mu_rows),
            num_servers=len(mu_rows[0]) if mu_rows else 0,
            lam=tuple(float(x) for x in lam),
            mu=mu_rows,
            cost=tuple(float(x) for x in cost),
            initial_state=None if initial_state is None else tuple(int(q) for q in initial_state),
        )

    def with_lambda(self, lam: Sequence[float]) -> "SystemParams":
        """Copy of this instance with different arrival rates (revalidated)."""
        return SystemParams.from_arrays(lam, self.mu, self.cost, self.initial_state)

    @property
    def lam_array(self) -> np.ndarray:
        return np.asarray(self.lam, dtype=float)

    @property
    def mu_array(self) -> np.ndarray:
        return np.asarray(self.mu, dtype=float).reshape(self.num_queues, self.num_servers)

    @property
    def cost_array(self) -> np.ndarray:
        return np.asarray(self.cost, dtype=float)

    def weights(self) -> np.ndarray:
        """The cμ weights c_i μ_ij as a U×K matrix."""
        return self.cost_array[:, None] * self.mu_array

    def edges(self) -> list[tuple[int, int]]:
        """Links (i, j) with μ_ij > 0 in lexicographic order."""
        return [
            (i, j)
            for i in range(self.num_queues)
            for j in range(self.num_servers)
            if self.mu[i][j] > 0.0
        ]

    def start_state(self) -> "QueueState":
        if self.initial_state is None:
            return QueueState.zeros(self.num_queues)
        return QueueState(self.initial_state)


@dataclass(frozen=True)
class QueueState:
    """Queue lengths at the start of a slot."""

    q: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(x < 0 for x in self.q):
            raise ValueError(f"queue lengths must be nonnegative, got {self.q}")

    @classmethod
    def zeros(cls, num_queues: int) -> "QueueState":
        return cls((0,) * num_queues)

    def __len__(self) -> int:
        return len(self.q)

    def __getitem__(self, index: int) -> int:
        return self.q[index]

    def __iter__(self):
        return iter(self.q)

    @property
    def total(self) -> int:
        return sum(self.q)

    def is_empty(self) -> bool:
        return not any(self.q)


@dataclass(frozen=True)
class Assignment:
    """Servers matched to queues for one slot; pairs are (queue, server), 0-based."""

    pairs: frozenset[tuple[int, int]] = frozenset()

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> "Assignment":
        return cls(frozenset((int(i), int(j)) for i, j in pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def servers_for(self, queue: int) -> list[int]:
        return sorted(j for i, j in self.pairs if i == queue)

    def load(self, queue: int) -> int:
        return sum(1 for i, _ in self.pairs if i == queue)

    def weight(self, weights: np.ndarray) -> float:
        return float(sum(weights[i, j] for i, j in self.pairs))

    def check(self, state: QueueState, num_servers: int) -> None:
        """Raise InvalidAssignmentError unless the assignment is feasible for the state."""
        used: set[int] = set()
        for i, j in self.pairs:
            if not (0 <= i < len(state)) or not (0 <= j < num_servers):
                raise InvalidAssignmentError(f"pair {format_pair((i, j))} out of range")
            if j in used:
                raise InvalidAssignmentError(f"server {j + 1} assigned more than once")
            used.add(j)
        for i in range(len(state)):
            load = self.load(i)
            if load > state[i]:
                raise InvalidAssignmentError(
                    f"queue {i + 1} holds {state[i]} jobs but {load} servers were assigned"
                )

    def to_text(self) -> str:
        """Semicolon-joined 1-based ``i-j`` pairs."""
        return ";".join(format_pair(p) for p in self)


def format_pair(pair: tuple[int, int]) -> str:
    return f"{pair[0] + 1}-{pair[1] + 1}"


def parse_pair(text: str) -> tuple[int, int]:
    """Parse a 1-based ``i-j`` link label into a 0-based pair."""
    left, sep, right = text.strip().partition("-")
    if not sep:
        raise ValueError(f"link '{text}' is not of the form i-j")
    i, j = int(left), int(right)
    if i < 1 or j < 1:
        raise ValueError(f"link '{text}' uses 1-based indices")
    return i - 1, j - 1


def load_instance(path: Path | str) -> SystemParams:
    """Load and validate an instance file.

    Raises:
        ConfigError: If the file is missing, unreadable or fails validation
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"instance file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except (json.JSONDecodeError, OSError) as e:
        raise ConfigError(f"cannot read instance file {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"instance file {path} must hold a JSON object")
    return parse_instance(raw, source=str(path))


def parse_instance(raw: dict, source: str = "<instance>") -> SystemParams:
    """Validate the instance keys of a mapping (other keys are ignored)."""
    keys = ("U", "K", "lambda", "mu", "cost", "initial_state")
    try:
        return SystemParams.model_validate({k: raw[k] for k in keys if k in raw})
    except ValidationError as e:
        raise ConfigError(f"invalid instance in {source}: {e}") from e


def dump_instance(params: SystemParams, path: Path | str) -> None:
    """Write an instance file readable by load_instance."""
    data = params.model_dump(by_alias=True, exclude_none=True)
    data["mu"] = [list(row) for row in params.mu]
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
