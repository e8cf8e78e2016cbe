"""Instance validation and the Δ-gap of the cμ weights.

The Δ-gap is the smallest separation between two cμ weights that compete either for
the same server (different queues) or within the same queue (different servers).
Only comparisons anchored on a link with μ_ij ≠ 0 count. With no comparable pair the
gap is +∞ and the cμ order is trivially unambiguous.
"""

import logging
import math
from dataclasses import dataclass, field

from src.models.instance import SystemParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate().

    Attributes:
        delta_gap: Minimum weight separation (math.inf when nothing is comparable)
        is_cmu_well_defined: True iff delta_gap > 0
        warnings: Human-readable findings that do not invalidate the instance
    """

    delta_gap: float
    is_cmu_well_defined: bool
    warnings: list[str] = field(default_factory=list)


def delta_gap(params: SystemParams) -> float:
    """Exact Δ-gap over all competing weight pairs (no floating tolerance)."""
    w = params.weights()
    mu = params.mu_array
    U, K = params.num_queues, params.num_servers
    gap = math.inf
    for j in range(K):
        for i in range(U):
            if mu[i, j] == 0.0:
                continue
            for other in range(U):
                if other != i:
                    gap = min(gap, abs(w[i, j] - w[other, j]))
    for i in range(U):
        for j in range(K):
            if mu[i, j] == 0.0:
                continue
            for other in range(K):
                if other != j:
                    gap = min(gap, abs(w[i, j] - w[i, other]))
    return float(gap)


def validate(params: SystemParams) -> ValidationReport:
    """Compute the Δ-gap and collect warnings; never raises."""
    warnings: list[str] = []
    for i, row in enumerate(params.mu):
        if not any(rate > 0.0 for rate in row):
            warnings.append(f"queue {i + 1} has no server with mu > 0 and can never be served")
    for i, rate in enumerate(params.lam):
        if rate == 0.0:
            warnings.append(f"queue {i + 1} has lambda = 0 and never receives arrivals")

    gap = delta_gap(params)
    if gap == 0.0:
        warnings.append("cmu weights tie (delta gap is 0); edit the costs to break the tie")

    for message in warnings:
        logger.warning(message)
    return ValidationReport(delta_gap=gap, is_cmu_well_defined=gap > 0.0, warnings=warnings)
