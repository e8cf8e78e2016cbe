"""Stationary distributions of truncated queue-length chains.

Chains are given as a kernel mapping a state (tuple of queue lengths) to its one-step
distribution. The state space is truncated to a box; mass leaving the box is
reflected onto its boundary, and the boundary occupancy estimates the truncated
tail. The box grows until that estimate drops below the tolerance.

Example usage:
    >>> kernel = single_queue_kernel(0.3, [0.5, 0.4])
    >>> dist = stationary_truncated(kernel, 200)
    >>> dist.prob((0,)), dist.mass_below(2)
"""

import itertools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from src.core.config import config
from src.core.errors import ContractViolationError, ConvergenceError, UnstableChainError

logger = logging.getLogger(__name__)

Kernel = Callable[[tuple[int, ...]], dict[tuple[int, ...], float]]

# Largest chain solved densely with GTH; larger ones use a sparse direct solve
DENSE_LIMIT = 800


@dataclass(frozen=True)
class StationaryDist:
    """Stationary probabilities on a truncated box.

    Attributes:
        probs: Probabilities indexed by state, shape = truncation + 1 per axis
        truncation: Largest queue length kept per axis
        residual_mass: Estimated mass outside the box; probs sum to 1 − residual_mass
    """

    probs: np.ndarray
    truncation: tuple[int, ...]
    residual_mass: float

    def prob(self, state: Sequence[int]) -> float:
        index = tuple(state)
        if any(x > n for x, n in zip(index, self.truncation)):
            return 0.0
        return float(self.probs[index])

    def mass(self, mask: np.ndarray) -> float:
        """Probability of the states selected by a boolean mask of the box shape."""
        return float(self.probs[mask].sum())

    def mass_below(self, level: int, axis: int = 0) -> float:
        """P(Q_axis < level)."""
        return float(self.marginal(axis)[:level].sum())

    def marginal(self, axis: int) -> np.ndarray:
        others = tuple(a for a in range(self.probs.ndim) if a != axis)
        return self.probs.sum(axis=others) if others else self.probs

    def mean(self, axis: int = 0) -> float:
        marginal = self.marginal(axis)
        return float(np.arange(marginal.size) @ marginal)

    def total_variation(self, other: "StationaryDist") -> float:
        """TV distance, padding the smaller box with zeros and comparing residuals."""
        shape = tuple(max(a, b) for a, b in zip(self.probs.shape, other.probs.shape))
        left = np.zeros(shape)
        right = np.zeros(shape)
        left[tuple(slice(0, n) for n in self.probs.shape)] = self.probs
        right[tuple(slice(0, n) for n in other.probs.shape)] = other.probs
        return 0.5 * (float(np.abs(left - right).sum()) + abs(self.residual_mass - other.residual_mass))

    def summary(self) -> dict[str, float]:
        """π(0) and, for scalar chains, π({0,1})."""
        zero = (0,) * self.probs.ndim
        data = {"pi0": self.prob(zero)}
        if self.probs.ndim == 1:
            data["pi01"] = self.mass_below(2)
        data["residual_mass"] = self.residual_mass
        return data


def gth_solve(matrix: np.ndarray) -> np.ndarray:
    """Stationary vector of a stochastic matrix by Grassmann-Taksar-Heyman elimination.

    The partial solution is renormalized after every back-substitution step, so chains
    whose mass ratios span many orders of magnitude do not overflow.

    Raises:
        ConvergenceError: If the result is not a finite probability vector
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    x = np.zeros(n)
    for i in range(n - 1):
        scale = a[i, i + 1 : n].sum()
        if scale <= 0:
            n = i + 1
            break
        a[i + 1 : n, i] /= scale
        a[i + 1 : n, i + 1 : n] += np.outer(a[i + 1 : n, i], a[i, i + 1 : n])
    x[n - 1] = 1.0
    for i in range(n - 2, -1, -1):
        x[i] = x[i + 1 : n] @ a[i + 1 : n, i]
        x[i:n] /= x[i:n].sum()
    return _checked(x)


def _checked(x: np.ndarray) -> np.ndarray:
    total = x.sum()
    if not np.isfinite(x).all() or total <= 0.0:
        raise ConvergenceError("stationary solve produced a non-finite vector")
    return x / total


def poisson_binomial(rates: Sequence[float]) -> list[float]:
    """Distribution of the number of successes of independent Bernoulli trials."""
    dist = [1.0]
    for p in rates:
        nxt = [0.0] * (len(dist) + 1)
        for k, mass in enumerate(dist):
            nxt[k] += mass * (1.0 - p)
            nxt[k + 1] += mass * p
        dist = nxt
    return dist


def queue_transition(q: int, lam: float, rates: Sequence[float]) -> dict[int, float]:
    """One-step law of a queue holding q jobs, served by the given links, then arrivals."""
    out: dict[int, float] = {}
    for served, p_served in enumerate(poisson_binomial(rates)):
        if p_served == 0.0:
            continue
        base = q - served
        if lam < 1.0:
            out[base] = out.get(base, 0.0) + p_served * (1.0 - lam)
        if lam > 0.0:
            out[base + 1] = out.get(base + 1, 0.0) + p_served * lam
    return out


def single_queue_kernel(lam: float, rates: Sequence[float]) -> Kernel:
    """Kernel of a queue whose jobs take its links in the given priority order."""
    rates = list(rates)

    def kernel(state: tuple[int, ...]) -> dict[tuple[int, ...], float]:
        (q,) = state
        law = queue_transition(q, lam, rates[: min(q, len(rates))])
        return {(nxt,): p for nxt, p in law.items()}

    return kernel


def product_transition(laws: Sequence[dict[int, float]]) -> dict[tuple[int, ...], float]:
    """Joint law of independent coordinates."""
    out: dict[tuple[int, ...], float] = {}
    for combo in itertools.product(*(law.items() for law in laws)):
        state = tuple(value for value, _ in combo)
        out[state] = out.get(state, 0.0) + math.prod(p for _, p in combo)
    return out


def _transition_matrix(kernel: Kernel, bounds: tuple[int, ...]):
    shape = tuple(n + 1 for n in bounds)
    size = math.prod(shape)
    rows, cols, vals = [], [], []
    for index, state in enumerate(np.ndindex(*shape)):
        for nxt, p in kernel(state).items():
            if p == 0.0:
                continue
            if any(x < 0 for x in nxt):
                raise ContractViolationError(f"kernel produced negative state {nxt} from {state}")
            clamped = tuple(min(x, n) for x, n in zip(nxt, bounds))
            rows.append(index)
            cols.append(int(np.ravel_multi_index(clamped, shape)))
            vals.append(p)
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()
    return matrix, shape


def _solve(matrix) -> np.ndarray:
    size = matrix.shape[0]
    if size <= DENSE_LIMIT:
        return gth_solve(matrix.toarray())
    system = (matrix.T - sp.identity(size, format="csr")).tolil()
    system[size - 1, :] = np.ones(size)
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    x = spsolve(system.tocsc(), rhs)
    return _checked(np.clip(x, 0.0, None))


def _boundary_mask(shape: tuple[int, ...]) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for axis, n in enumerate(shape):
        index = [slice(None)] * len(shape)
        index[axis] = n - 1
        mask[tuple(index)] = True
    return mask


def stationary_truncated(
    kernel: Kernel,
    truncation: int | Sequence[int],
    tol: float | None = None,
    adaptive: bool = True,
    budget: int | None = None,
    growth: float = 1.5,
    max_rounds: int = 20,
) -> StationaryDist:
    """Solve πP = π on a truncated box, growing the box until its boundary is negligible.

    Args:
        kernel: State -> one-step distribution (states may leave the box)
        truncation: Initial bound per axis (an int for scalar chains)
        tol: Accepted boundary mass (default: configured boundary tolerance)
        adaptive: Grow the box; when False the box is taken as the exact state space
        budget: Largest number of states allowed (default: configured state budget)
        growth: Factor applied to every bound per round
        max_rounds: Rounds before giving up

    Raises:
        ConvergenceError: If the budget or the round limit is reached first
    """
    tol = config.boundary_tolerance if tol is None else tol
    budget = config.state_budget if budget is None else budget
    bounds = (truncation,) if isinstance(truncation, int) else tuple(truncation)

    for _ in range(max_rounds):
        size = math.prod(n + 1 for n in bounds)
        if size > budget:
            raise ConvergenceError(f"truncated chain with bounds {bounds} exceeds {budget} states")
        matrix, shape = _transition_matrix(kernel, bounds)
        probs = _solve(matrix).reshape(shape)
        if not adaptive:
            return StationaryDist(probs=probs, truncation=bounds, residual_mass=0.0)
        boundary = float(probs[_boundary_mask(shape)].sum())
        if boundary < tol:
            return StationaryDist(
                probs=probs * (1.0 - boundary), truncation=bounds, residual_mass=boundary
            )
        logger.debug(f"boundary mass {boundary:.2e} at bounds {bounds}; growing")
        bounds = tuple(max(n + 1, math.ceil(n * growth)) for n in bounds)
    raise ConvergenceError(f"boundary mass still above {tol} after {max_rounds} rounds")


def stationary_1x2_closed_form(
    lam: float, mu1: float, mu2: float, truncation: int | None = None
) -> StationaryDist:
    """Exact stationary law of one queue served by two servers.

    A single job uses server 1 (rate mu1); two or more jobs use both. Above one job the
    law is geometric with ratio α, the root in [0, 1) of p₊₁ = (p₋₁ + p₋₂)x + p₋₂x².

    Args:
        lam: Arrival rate
        mu1: Rate of the server that takes a lone job
        mu2: Rate of the second server
        truncation: Largest queue length listed (default: scalar truncation, extended
            until the listed tail is below 1e-15)

    Raises:
        UnstableChainError: If lam >= mu1 + mu2
        ContractViolationError: If mu1 is zero while jobs can arrive
    """
    if lam >= mu1 + mu2:
        raise UnstableChainError(f"lambda={lam} >= mu1 + mu2 = {mu1 + mu2}")
    limit = config.scalar_truncation if truncation is None else truncation
    if lam == 0.0:
        probs = np.zeros(limit + 1)
        probs[0] = 1.0
        return StationaryDist(probs=probs, truncation=(limit,), residual_mass=0.0)
    if mu1 <= 0.0:
        raise ContractViolationError("the server taking a lone job needs mu1 > 0")

    up = lam * (1 - mu1) * (1 - mu2)
    down_one = (1 - lam) * ((1 - mu1) * mu2 + (1 - mu2) * mu1) + lam * mu1 * mu2
    down_two = (1 - lam) * mu1 * mu2
    b = down_one + down_two
    alpha = 2.0 * up / (b + math.sqrt(b * b + 4.0 * down_two * up))

    # unnormalized with π1 = 1
    pi2 = lam * (1 - mu1) / (b + down_two * alpha)
    pi0 = ((1 - lam) * mu1 + down_two * pi2) / lam
    total = pi0 + 1.0 + pi2 / (1.0 - alpha)
    pi0, pi1, pi2 = pi0 / total, 1.0 / total, pi2 / total

    if truncation is None and alpha > 0.0:
        while limit < 10**6 and pi2 * alpha ** (limit - 1) / (1.0 - alpha) > 1e-15:
            limit *= 2
    probs = np.zeros(limit + 1)
    probs[0] = pi0
    if limit >= 1:
        probs[1] = pi1
    if limit >= 2:
        probs[2:] = pi2 * alpha ** np.arange(limit - 1)
    if limit >= 2:
        residual = pi2 * alpha ** (limit - 1) / (1.0 - alpha)
    else:
        residual = 1.0 - float(probs.sum())
    return StationaryDist(probs=probs, truncation=(limit,), residual_mass=float(residual))
