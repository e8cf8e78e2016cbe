"""Canonical instances used by the stability checks, each with its priority rule.

Example usage:
    >>> params, order = w_network()
    >>> result = m_network_counterexample(0.01)
    >>> result.in_capacity, result.verdict_order_a.status
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

from src.core.errors import ConstructionError
from src.models.capacity import capacity_contains
from src.models.instance import SystemParams
from src.schedulers.matching import PriorityOrder
from src.stability.hierarchy import TruncationConfig, hierarchical_verdict
from src.stability.verdict import StabilityVerdict

logger = logging.getLogger(__name__)


def _links(*pairs: tuple[int, int]) -> PriorityOrder:
    """Priority order from 1-based links."""
    return PriorityOrder(tuple((i - 1, j - 1) for i, j in pairs))


def instability_example() -> tuple[SystemParams, SystemParams]:
    """A 2×2 instance inside capacity that the cμ rule cannot stabilize, and a stable sibling.

    Both share μ and c; the sibling lowers λ2 below the stability threshold (≈ 0.694).
    """
    mu = [[0.6, 0.3], [0.1, 0.9]]
    cost = [10.0, 1.0]
    return (
        SystemParams.from_arrays([0.5, 0.8], mu, cost),
        SystemParams.from_arrays([0.5, 0.6], mu, cost),
    )


def w_network(lam: Sequence[float] = (0.3, 0.4, 0.2)) -> tuple[SystemParams, PriorityOrder]:
    """Three queues, two servers; queue 2 is shared and ranked between queues 1 and 3."""
    mu = [[0.6, 0.0], [0.5, 0.5], [0.0, 0.7]]
    return (
        SystemParams.from_arrays(lam, mu, [1.0, 1.0, 1.0]),
        _links((1, 1), (2, 1), (2, 2), (3, 2)),
    )


def n_network(
    lam: Sequence[float], mu11: float, mu12: float, mu22: float, cost: Sequence[float] = (3.0, 1.0)
) -> tuple[SystemParams, PriorityOrder]:
    """Queue 1 uses both servers, queue 2 only server 2, queue 1 first."""
    params = SystemParams.from_arrays(lam, [[mu11, mu12], [0.0, mu22]], cost)
    first = (1, 1) if mu11 >= mu12 else (1, 2)
    second = (1, 2) if first == (1, 1) else (1, 1)
    return params, _links(first, second, (2, 2))


def generalized_n_network(
    lam_shared: float,
    mu_shared: Sequence[float],
    lam_dedicated: Sequence[float],
    mu_dedicated: Sequence[float],
) -> tuple[SystemParams, PriorityOrder]:
    """Queue 1 reaches every server; queue j + 1 is dedicated to server j and outranks queue 1.

    Raises:
        ConstructionError: If the rate vectors do not have one entry per server
    """
    K = len(mu_shared)
    if len(lam_dedicated) != K or len(mu_dedicated) != K:
        raise ConstructionError("need one dedicated queue per server")
    mu = [list(mu_shared)]
    for j in range(K):
        row = [0.0] * K
        row[j] = mu_dedicated[j]
        mu.append(row)
    params = SystemParams.from_arrays([lam_shared, *lam_dedicated], mu, [1.0] * (K + 1))
    edges = [(j + 1, j) for j in range(K)]
    edges += sorted(((0, j) for j in range(K)), key=lambda e: (-mu_shared[e[1]], e[1]))
    return params, PriorityOrder(tuple(edges))


def three_level_network(
    lam: Sequence[float] = (0.15, 0.3, 0.4, 0.2),
) -> tuple[SystemParams, PriorityOrder]:
    """Four queues, three servers, three priority levels.

    Queue 3 leads on servers 2 and 3, queue 2 on server 1 and second on server 2,
    queue 4 is second on server 3 and queue 1 last on server 1.
    """
    mu = [
        [0.6, 0.0, 0.0],
        [0.4, 0.5, 0.0],
        [0.0, 0.4, 0.5],
        [0.0, 0.0, 0.7],
    ]
    return (
        SystemParams.from_arrays(lam, mu, [1.0] * 4),
        _links((3, 3), (3, 2), (2, 1), (2, 2), (4, 3), (1, 1)),
    )


def m_network(
    epsilon: float, mu11: float = 0.5, mu23: float = 0.5
) -> tuple[SystemParams, PriorityOrder, PriorityOrder]:
    """Two queues, three servers; server 2 (rate 3ε to both) is shared.

    λ1 = μ11 + ε and λ2 = μ23 + ε, so each queue needs part of server 2. Order A ranks
    queue 1 first on server 2, order B queue 2.

    Raises:
        ConstructionError: If ε ≤ 0, 3ε reaches a dedicated rate, or an arrival rate reaches 1
    """
    if epsilon <= 0.0:
        raise ConstructionError(f"epsilon must be positive, got {epsilon}")
    shared = 3.0 * epsilon
    if shared >= mu11 or shared >= mu23:
        raise ConstructionError(f"3*epsilon={shared} must stay below mu11 and mu23")
    lam = (mu11 + epsilon, mu23 + epsilon)
    if max(lam) >= 1.0:
        raise ConstructionError(f"arrival rates {lam} must stay below 1")
    params = SystemParams.from_arrays(lam, [[mu11, shared, 0.0], [0.0, shared, mu23]], [1.0, 1.0])
    order_a = _links((1, 1), (1, 2), (2, 3), (2, 2))
    order_b = _links((2, 3), (2, 2), (1, 1), (1, 2))
    return params, order_a, order_b


@dataclass(frozen=True)
class MNetworkResult:
    """Verdicts of the M network under both static priority orders.

    Attributes:
        params: The constructed instance
        in_capacity: Capacity-region membership
        verdict_order_a: Queue 1 first on the shared server
        verdict_order_b: Queue 2 first on the shared server
    """

    params: SystemParams
    in_capacity: bool
    verdict_order_a: StabilityVerdict
    verdict_order_b: StabilityVerdict

    @property
    def no_static_rule_stable(self) -> bool:
        return self.in_capacity and all(
            v.status == "Unstable" for v in (self.verdict_order_a, self.verdict_order_b)
        )


def m_network_counterexample(
    epsilon: float,
    mu11: float = 0.5,
    mu23: float = 0.5,
    truncation: TruncationConfig | None = None,
) -> MNetworkResult:
    """Build the M network and check it under both static priority orders."""
    params, order_a, order_b = m_network(epsilon, mu11, mu23)
    in_capacity = capacity_contains(params).inside
    verdict_a = hierarchical_verdict(params, sigma=order_a, truncation=truncation)
    verdict_b = hierarchical_verdict(params, sigma=order_b, truncation=truncation)
    logger.info(
        f"M network eps={epsilon}: capacity={in_capacity}, "
        f"order A {verdict_a.status}, order B {verdict_b.status}"
    )
    return MNetworkResult(params, in_capacity, verdict_a, verdict_b)
