import numpy as np
import pytest

from src.core.errors import ConvergenceError, UnstableChainError
from src.stability.stationary import (
    gth_solve,
    poisson_binomial,
    queue_transition,
    single_queue_kernel,
    stationary_1x2_closed_form,
    stationary_truncated,
)


def test_gth_two_state_chain() -> None:
    pi = gth_solve(np.array([[0.9, 0.1], [0.2, 0.8]]))

    assert pi == pytest.approx([2 / 3, 1 / 3])


def test_gth_rejects_non_finite_matrix() -> None:
    with pytest.raises(ConvergenceError):
        gth_solve(np.array([[np.nan, np.nan], [0.2, 0.8]]))


def test_truncated_solve_of_light_load_stays_finite() -> None:
    exact = stationary_1x2_closed_form(0.02, 0.9, 0.9)

    dist = stationary_truncated(single_queue_kernel(0.02, [0.9, 0.9]), 300, adaptive=False)

    assert np.isfinite(dist.probs).all()
    assert dist.probs.sum() == pytest.approx(1.0)
    assert dist.prob((0,)) == pytest.approx(exact.prob((0,)), rel=1e-9)
    assert dist.prob((1,)) == pytest.approx(exact.prob((1,)), rel=1e-9)


def test_adaptive_solve_of_light_load_stops_at_first_box() -> None:
    dist = stationary_truncated(single_queue_kernel(0.02, [0.9, 0.9]), 300)

    assert dist.truncation == (300,)
    assert np.isfinite(dist.probs).all()


def test_poisson_binomial_sums_to_one() -> None:
    dist = poisson_binomial([0.5, 0.3, 0.9])

    assert sum(dist) == pytest.approx(1.0)
    assert dist[0] == pytest.approx(0.5 * 0.7 * 0.1)
    assert dist[3] == pytest.approx(0.5 * 0.3 * 0.9)


@pytest.mark.parametrize("q", [0, 1, 2, 5])
def test_queue_transition_is_a_distribution(q: int) -> None:
    law = queue_transition(q, 0.4, [0.5, 0.3][: min(q, 2)])

    assert sum(law.values()) == pytest.approx(1.0)
    assert min(law) >= max(q - 2, 0)
    assert max(law) <= q + 1


def test_single_server_closed_form_is_geometric() -> None:
    lam, mu = 0.3, 0.5
    dist = stationary_1x2_closed_form(lam, mu, 0.0)
    ratio = lam * (1 - mu) / ((1 - lam) * mu)

    assert dist.prob((0,)) == pytest.approx(1 - lam / mu)
    for n in range(1, 6):
        assert dist.prob((n + 1,)) / dist.prob((n,)) == pytest.approx(ratio)


@pytest.mark.parametrize("lam", [0.1, 0.35, 0.6])
@pytest.mark.parametrize("rates", [(0.6, 0.3), (0.5, 0.4), (0.8, 0.05)])
def test_closed_form_matches_truncated_solve(lam: float, rates: tuple[float, float]) -> None:
    exact = stationary_1x2_closed_form(lam, *rates)
    numeric = stationary_truncated(single_queue_kernel(lam, rates), 100)

    assert exact.total_variation(numeric) <= 1e-7
    assert exact.probs.sum() + exact.residual_mass == pytest.approx(1.0)


def test_closed_form_without_arrivals() -> None:
    dist = stationary_1x2_closed_form(0.0, 0.6, 0.3, truncation=10)

    assert dist.prob((0,)) == 1.0
    assert dist.mass_below(2) == 1.0


def test_closed_form_rejects_overload() -> None:
    with pytest.raises(UnstableChainError):
        stationary_1x2_closed_form(0.9, 0.6, 0.3)


def test_truncated_solve_respects_state_budget() -> None:
    with pytest.raises(ConvergenceError):
        stationary_truncated(single_queue_kernel(0.3, [0.5]), 50, budget=10)


def test_truncated_solve_gives_up_on_slow_decay() -> None:
    with pytest.raises(ConvergenceError):
        stationary_truncated(single_queue_kernel(0.49, [0.5]), 5, max_rounds=1)


def test_truncated_solve_of_product_chain() -> None:
    def kernel(state):
        q1, q2 = state
        first = queue_transition(q1, 0.2, [0.5] if q1 else [])
        second = queue_transition(q2, 0.3, [0.6] if q2 else [])
        return {(a, b): pa * pb for a, pa in first.items() for b, pb in second.items()}

    dist = stationary_truncated(kernel, (40, 40))

    assert dist.prob((0, 0)) == pytest.approx((1 - 0.2 / 0.5) * (1 - 0.3 / 0.6), abs=1e-7)
    assert dist.mean(axis=1) == pytest.approx(
        stationary_1x2_closed_form(0.3, 0.6, 0.0).mean(), abs=1e-6
    )
