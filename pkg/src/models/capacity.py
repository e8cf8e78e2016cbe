"""Capacity-region membership through a static-split linear program.

λ lies in the capacity region iff some right-stochastic K×U matrix M (row j = how
server j splits its time over the queues) gives λ_i < Σ_j μ_ij M_ji for every queue.
The LP maximizes the uniform slack t; the instance is inside iff t* > 0.

Example usage:
    >>> from src.models.capacity import capacity_contains
    >>> result = capacity_contains(params)
    >>> result.inside, round(result.margin, 3)
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from src.core.errors import LPSolverError
from src.models.instance import MAX_DIMENSION, SystemParams

logger = logging.getLogger(__name__)

# Margins at or below this are treated as the region boundary
BOUNDARY_MARGIN = 1e-12


@dataclass(frozen=True)
class CapacityResult:
    """Outcome of capacity_contains.

    Attributes:
        inside: True iff the optimal uniform slack is strictly positive
        margin: Optimal slack min_i (Σ_j μ_ij M_ji − λ_i) attained by the witness
        witness: K×U right-stochastic split matrix attaining the margin
        on_boundary: True when |margin| is within BOUNDARY_MARGIN
    """

    inside: bool
    margin: float
    witness: np.ndarray
    on_boundary: bool = False


def split_slack(params: SystemParams, witness: np.ndarray) -> np.ndarray:
    """Per-queue slack Σ_j μ_ij M_ji − λ_i of a split matrix."""
    served = np.einsum("ij,ji->i", params.mu_array, witness)
    return served - params.lam_array


def capacity_contains(params: SystemParams) -> CapacityResult:
    """Solve the static-split LP and report region membership.

    Raises:
        LPSolverError: If U or K exceed the supported size or the solver fails
    """
    U, K = params.num_queues, params.num_servers
    if U > MAX_DIMENSION or K > MAX_DIMENSION:
        raise LPSolverError(f"capacity LP sized for U,K <= {MAX_DIMENSION}, got {U}x{K}")

    mu = params.mu_array
    n_split = K * U
    # variables: M flattened row-major (j, i) then t; maximize t
    objective = np.zeros(n_split + 1)
    objective[-1] = -1.0

    # λ_i − Σ_j μ_ij M_ji + t ≤ 0
    a_ub = np.zeros((U, n_split + 1))
    for i in range(U):
        for j in range(K):
            a_ub[i, j * U + i] = -mu[i, j]
        a_ub[i, -1] = 1.0
    b_ub = -params.lam_array

    a_eq = np.zeros((K, n_split + 1))
    for j in range(K):
        a_eq[j, j * U : (j + 1) * U] = 1.0
    b_eq = np.ones(K)

    bounds = [(0.0, 1.0)] * n_split + [(None, None)]
    result = linprog(objective, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                     method="highs")
    if not result.success:
        raise LPSolverError(f"capacity LP failed: {result.message}")

    witness = np.clip(result.x[:n_split].reshape(K, U), 0.0, None)
    witness = witness / witness.sum(axis=1, keepdims=True)
    margin = float(split_slack(params, witness).min())
    on_boundary = abs(margin) <= BOUNDARY_MARGIN
    if on_boundary:
        logger.warning(f"arrival rates lie on the capacity boundary (margin {margin:.3e})")
    return CapacityResult(
        inside=margin > BOUNDARY_MARGIN,
        margin=margin,
        witness=witness,
        on_boundary=on_boundary,
    )
