"""Exact stability regions of two-queue systems where queue 1 has priority everywhere.

When queue 1 outranks queue 2 on every server, Q1 is an autonomous chain and queue 2
is stable iff its arrival rate is below the service it receives on average over the
stationary law of Q1. For two servers that law is available in closed form.

Example usage:
    >>> params = SystemParams.from_arrays([0.5, 0.8], [[0.6, 0.3], [0.1, 0.9]], [10, 1])
    >>> classify_2x2(params).status
    <VerdictStatus.UNSTABLE: 'Unstable'>
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.core.config import config
from src.core.errors import StructureError
from src.models.instance import SystemParams
from src.stability.stationary import (
    StationaryDist,
    single_queue_kernel,
    stationary_1x2_closed_form,
    stationary_truncated,
)
from src.stability.verdict import (
    LevelMargin,
    StabilityVerdict,
    VerdictStatus,
    status_from_margins,
)

logger = logging.getLogger(__name__)


def _check_structure(params: SystemParams) -> None:
    if params.num_queues != 2 or params.num_servers != 2:
        raise StructureError(
            f"classify_2x2 needs a 2x2 instance, got {params.num_queues}x{params.num_servers}"
        )
    (m11, m12), (m21, m22) = params.mu
    c1, c2 = params.cost
    if not c2 * m21 < c1 * m11:
        raise StructureError(f"c2*mu21 < c1*mu11 fails ({c2 * m21} >= {c1 * m11})")
    if not c2 * m22 < c1 * m12:
        raise StructureError(f"c2*mu22 < c1*mu12 fails ({c2 * m22} >= {c1 * m12})")
    if not m12 < m11:
        raise StructureError(f"mu12 < mu11 fails ({m12} >= {m11})")


def _first_queue_verdict(params: SystemParams, total_rate: float, tolerance: float,
                         method: str) -> StabilityVerdict | None:
    margin = total_rate - params.lam[0]
    if margin > tolerance:
        return None
    level = LevelMargin(level=1, queue=1, service_rate=total_rate,
                        arrival_rate=params.lam[0], margin=margin)
    status = status_from_margins([margin], tolerance)
    return StabilityVerdict(
        status=status, method=method, per_level_margins=[level],
        diagnostics=["queue 1 alone exceeds its total service rate"],
    )


def _verdict(params: SystemParams, dist: StationaryDist, total_rate: float, threshold: float,
             tolerance: float, method: str) -> StabilityVerdict:
    margins = [
        LevelMargin(level=1, queue=1, service_rate=total_rate, arrival_rate=params.lam[0],
                    margin=total_rate - params.lam[0]),
        LevelMargin(level=2, queue=2, service_rate=threshold, arrival_rate=params.lam[1],
                    margin=threshold - params.lam[1]),
    ]
    status = status_from_margins([m.margin for m in margins], tolerance)
    if status is VerdictStatus.BOUNDARY:
        logger.warning(f"lambda2={params.lam[1]} is on the stability boundary {threshold:.12f}")
    return StabilityVerdict(
        status=status,
        method=method,
        per_level_margins=margins,
        pi_summaries={"q1": dist.summary()},
        truncation={"q1": list(dist.truncation)},
    )


def classify_2x2(params: SystemParams, tolerance: float | None = None) -> StabilityVerdict:
    """Classify a 2×2 instance under the greedy cμ rule.

    Requires c2μ21 < c1μ11, c2μ22 < c1μ12 and μ12 < μ11, so queue 1 takes server 1 for
    a lone job and both servers otherwise. The instance is geometrically ergodic iff
    λ1 < μ11 + μ12 and λ2 < π(0)μ21 + π({0,1})μ22 with π the stationary law of Q1.

    Raises:
        StructureError: Naming the first structural inequality that fails
    """
    tolerance = config.strict_tolerance if tolerance is None else tolerance
    _check_structure(params)
    (m11, m12), (m21, m22) = params.mu
    early = _first_queue_verdict(params, m11 + m12, tolerance, "2x2")
    if early is not None:
        return early

    dist = stationary_1x2_closed_form(params.lam[0], m11, m12)
    threshold = dist.prob((0,)) * m21 + dist.mass_below(2) * m22
    logger.debug(f"2x2 threshold for lambda2: {threshold:.10f}")
    return _verdict(params, dist, m11 + m12, threshold, tolerance, "2x2")


def classify_two_queue_priority(
    params: SystemParams,
    server_order: list[int] | None = None,
    tolerance: float | None = None,
) -> StabilityVerdict:
    """Exact region of a 2×K system with queue 1 first on every server.

    Queue 1's jobs take its servers in ``server_order`` (default: descending μ1j); with q
    jobs it occupies the first min(q, K) of them, and queue 2 gets the rest. The second
    condition reads λ2 < Σ_q π(q) Σ_{k > q} μ2,order[k].

    Raises:
        StructureError: If the instance does not have exactly two queues
    """
    if params.num_queues != 2:
        raise StructureError(f"two-queue priority needs U=2, got {params.num_queues}")
    tolerance = config.strict_tolerance if tolerance is None else tolerance
    K = params.num_servers
    mu = params.mu_array
    order = server_order or sorted(range(K), key=lambda j: (-mu[0, j], j))
    if sorted(order) != list(range(K)):
        raise StructureError(f"server order {order} is not a permutation of the servers")

    total = float(mu[0].sum())
    early = _first_queue_verdict(params, total, tolerance, "2xK")
    if early is not None:
        return early

    rates = [mu[0, j] for j in order]
    dist = stationary_truncated(single_queue_kernel(params.lam[0], rates), config.scalar_truncation)
    leftover = np.array([mu[1, order[q:]].sum() for q in range(K)])
    threshold = float(dist.marginal(0)[:K] @ leftover)
    return _verdict(params, dist, total, threshold, tolerance, "2xK")


@dataclass(frozen=True)
class NNetworkRegion:
    """Stability thresholds for λ2 in an N network (μ21 = 0, queue 1 first).

    Attributes:
        lone_job_server: Server (0-based) a lone queue-1 job takes
        threshold: Exact bound on λ2 from the stationary law of Q1
        drift_threshold: Bound on λ2 implied by the drift feasibility test
        queue1_stable: λ1 < μ11 + μ12
    """

    lone_job_server: int
    threshold: float
    drift_threshold: float
    queue1_stable: bool

    def contains(self, lam2: float) -> bool:
        return self.queue1_stable and lam2 < self.threshold


def n_network_region(params: SystemParams) -> NNetworkRegion:
    """Exact and drift-test thresholds for the N network.

    If μ11 ≥ μ12 a lone job uses server 1 and λ2 < π({0,1})μ22; the drift test gives
    (1 − λ1/(μ11+μ12))μ22. Otherwise it uses server 2, λ2 < π(0)μ22, and the drift test
    gives (1 − λ1/μ12)⁺μ22.

    Raises:
        StructureError: If the instance is not 2×2 with μ21 = 0 and μ12 > 0
    """
    if params.num_queues != 2 or params.num_servers != 2:
        raise StructureError("the N network is a 2x2 instance")
    (m11, m12), (m21, m22) = params.mu
    if m21 != 0.0 or m12 <= 0.0:
        raise StructureError("the N network needs mu21 = 0 and mu12 > 0")
    lam1 = params.lam[0]
    stable = lam1 < m11 + m12
    if m11 >= m12:
        drift = (1.0 - lam1 / (m11 + m12)) * m22
        exact = stationary_1x2_closed_form(lam1, m11, m12).mass_below(2) * m22 if stable else 0.0
        return NNetworkRegion(0, exact, drift, stable)
    drift = max(0.0, 1.0 - lam1 / m12) * m22
    exact = stationary_1x2_closed_form(lam1, m12, m11).prob((0,)) * m22 if stable else 0.0
    return NNetworkRegion(1, exact, drift, stable)
