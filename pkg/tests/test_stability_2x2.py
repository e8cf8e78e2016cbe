import numpy as np
import pytest

from src.core.errors import StructureError
from src.models.capacity import capacity_contains
from src.models.instance import QueueState, SystemParams
from src.schedulers.matching import cmu_order
from src.stability.networks import instability_example, n_network
from src.stability.rates import (
    evaluate_alpha,
    feasibility_alpha,
    greedy_rule,
    r_vector,
    rule_disagreements,
)
from src.stability.two_by_two import (
    classify_2x2,
    classify_two_queue_priority,
    n_network_region,
)
from src.stability.verdict import VerdictStatus


def _params(lam: list[float], mu: list[list[float]], cost: list[float] | None = None) -> SystemParams:
    return SystemParams.from_arrays(lam, mu, cost or [10.0, 1.0])


def test_example_instance_is_unstable_inside_capacity() -> None:
    unstable, _ = instability_example()

    verdict = classify_2x2(unstable)

    assert verdict.status is VerdictStatus.UNSTABLE
    assert verdict.per_level_margins[1].service_rate == pytest.approx(0.6941, abs=1e-3)
    assert verdict.per_level_margins[0].margin == pytest.approx(0.4)
    assert capacity_contains(unstable).inside


def test_sibling_instance_is_ergodic() -> None:
    _, sibling = instability_example()

    verdict = classify_2x2(sibling)

    assert verdict.status is VerdictStatus.GEOMETRICALLY_ERGODIC
    assert verdict.method == "2x2"
    assert "q1" in verdict.pi_summaries


def test_no_arrivals_to_queue_two_is_ergodic() -> None:
    params = _params([0.5, 0.0], [[0.6, 0.3], [0.1, 0.9]])

    assert classify_2x2(params).status is VerdictStatus.GEOMETRICALLY_ERGODIC


def test_overloaded_queue_one_stops_early() -> None:
    params = _params([0.95, 0.1], [[0.6, 0.3], [0.1, 0.9]])

    verdict = classify_2x2(params)

    assert verdict.status is VerdictStatus.UNSTABLE
    assert len(verdict.per_level_margins) == 1


@pytest.mark.parametrize(
    "mu, cost, fragment",
    [
        ([[0.6, 0.3], [0.7, 0.2]], [1.0, 1.0], "c2*mu21 < c1*mu11"),
        ([[0.6, 0.3], [0.1, 0.9]], [1.0, 1.0], "c2*mu22 < c1*mu12"),
        ([[0.3, 0.6], [0.1, 0.2]], [10.0, 1.0], "mu12 < mu11"),
    ],
)
def test_structure_errors_name_the_failing_condition(
    mu: list[list[float]], cost: list[float], fragment: str
) -> None:
    with pytest.raises(StructureError, match=fragment.replace("*", r"\*")):
        classify_2x2(_params([0.2, 0.2], mu, cost))


def test_classify_2x2_rejects_other_shapes() -> None:
    with pytest.raises(StructureError):
        classify_2x2(SystemParams.from_arrays([0.2], [[0.5, 0.4]], [1.0]))


def test_boundary_band_around_threshold() -> None:
    unstable, _ = instability_example()
    threshold = classify_2x2(unstable).per_level_margins[1].service_rate

    below = classify_2x2(unstable.with_lambda([0.5, threshold - 1e-8]))
    above = classify_2x2(unstable.with_lambda([0.5, threshold + 1e-8]))
    at = classify_2x2(unstable.with_lambda([0.5, threshold]))

    assert below.status is VerdictStatus.GEOMETRICALLY_ERGODIC
    assert above.status is VerdictStatus.UNSTABLE
    assert at.status is VerdictStatus.BOUNDARY


def test_drift_feasibility_implies_ergodic() -> None:
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 20:
        m11 = rng.uniform(0.3, 0.9)
        m12 = rng.uniform(0.15, m11)
        mu = [[m11, m12], rng.uniform(0.0, 0.95, size=2).tolist()]
        lam = rng.uniform(0.0, 0.9, size=2).tolist()
        params = _params(lam, mu)
        if feasibility_alpha(params).game_value <= 1e-6:
            continue
        checked += 1
        assert classify_2x2(params).status is VerdictStatus.GEOMETRICALLY_ERGODIC


def test_two_queue_priority_agrees_with_closed_form() -> None:
    for params in instability_example():
        closed = classify_2x2(params)
        general = classify_two_queue_priority(params)

        assert general.method == "2xK"
        assert general.status is closed.status
        assert general.per_level_margins[1].service_rate == pytest.approx(
            closed.per_level_margins[1].service_rate, abs=1e-7
        )


def test_two_queue_priority_with_three_servers() -> None:
    params = SystemParams.from_arrays([0.2, 0.35], [[0.6, 0.5, 0.4], [0.3, 0.2, 0.1]], [10.0, 1.0])

    verdict = classify_two_queue_priority(params)

    assert verdict.status is VerdictStatus.GEOMETRICALLY_ERGODIC
    with pytest.raises(StructureError):
        classify_two_queue_priority(params, server_order=[0, 0, 1])


def test_fixed_alpha_drift_sign() -> None:
    mu = [[0.6, 0.5, 0.4], [0.3, 0.2, 0.1]]
    half = np.array([0.5, 0.5])
    passing = SystemParams.from_arrays([0.2, 0.35], mu, [10.0, 1.0])
    failing = SystemParams.from_arrays([0.3, 0.35], mu, [10.0, 1.0])

    assert evaluate_alpha(passing, greedy_rule(cmu_order(passing)), half) == pytest.approx(0.025)
    assert evaluate_alpha(failing, greedy_rule(cmu_order(failing)), half) == pytest.approx(-0.025)


def test_n_network_drift_threshold_matches_game() -> None:
    inside, _ = n_network([0.4, 0.2], 0.5, 0.3, 0.6)
    outside, _ = n_network([0.4, 0.4], 0.5, 0.3, 0.6)

    region = n_network_region(inside)

    assert region.lone_job_server == 0
    assert region.drift_threshold == pytest.approx(0.3)
    assert region.threshold >= region.drift_threshold
    assert region.contains(0.2)
    assert feasibility_alpha(inside).game_value > 0
    assert feasibility_alpha(outside).game_value < 0


def test_n_network_with_faster_second_server() -> None:
    params, order = n_network([0.2, 0.1], 0.3, 0.5, 0.6)

    region = n_network_region(params)

    assert order.edges[0] == (0, 1)
    assert region.lone_job_server == 1
    assert region.drift_threshold == pytest.approx((1 - 0.2 / 0.5) * 0.6)
    assert region.threshold >= region.drift_threshold


def test_feasibility_alpha_witness() -> None:
    params, order = n_network([0.4, 0.2], 0.5, 0.3, 0.6)
    rule = greedy_rule(order)

    result = feasibility_alpha(params, rule)

    assert result.game_value > 0
    assert result.alpha.sum() == pytest.approx(1.0)
    assert evaluate_alpha(params, rule, result.alpha) == pytest.approx(result.game_value)
    assert evaluate_alpha(params, rule, result.alpha_positive) > 0
    assert (result.alpha_positive > 0).all()


def test_drift_test_is_conservative_on_the_stable_sibling() -> None:
    _, sibling = instability_example()

    assert classify_2x2(sibling).status is VerdictStatus.GEOMETRICALLY_ERGODIC
    assert feasibility_alpha(sibling).alpha is None


def test_feasibility_far_outside_capacity_is_negative() -> None:
    params = _params([0.9, 0.9], [[0.3, 0.2], [0.1, 0.15]])

    result = feasibility_alpha(params)

    assert result.game_value < 0
    assert result.alpha is None


def test_r_vector_examples() -> None:
    unstable, _ = instability_example()
    rule = greedy_rule(cmu_order(unstable))

    assert r_vector(unstable, rule, QueueState((2, 0))).tolist() == pytest.approx([0.9, 0.0])
    assert r_vector(unstable, rule, QueueState((1, 1))).tolist() == pytest.approx([0.6, 0.9])
    assert r_vector(unstable, rule, QueueState((0, 2))).tolist() == pytest.approx([0.0, 1.0])


def test_rule_disagreements_finds_the_crossed_matching() -> None:
    params = SystemParams.from_arrays([0.1, 0.1], [[0.9, 0.8], [0.85, 0.1]], [1.0, 1.0])

    assert (1, 1) in rule_disagreements(params)
    assert rule_disagreements(instability_example()[1]) == []


def test_n_network_game_sign_matches_closed_form() -> None:
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 100:
        m11 = rng.uniform(0.2, 0.9)
        m12 = rng.uniform(0.1, m11)
        m22 = rng.uniform(0.1, 0.9)
        lam1 = rng.uniform(0.0, min(0.95, m11 + m12))
        lam2 = rng.uniform(0.0, m22)
        params, order = n_network([lam1, lam2], m11, m12, m22, cost=(10.0, 1.0))
        closed = (1 - lam1 / (m11 + m12)) * m22
        if abs(closed - lam2) < 1e-6:
            continue
        checked += 1

        value = feasibility_alpha(params, greedy_rule(order)).game_value

        assert (value > 0) == (lam2 < closed)


def test_two_by_k_half_alpha_matches_second_queue_capacity() -> None:
    rng = np.random.default_rng(8)
    half = np.array([0.5, 0.5])
    for _ in range(100):
        K = int(rng.integers(2, 4))
        first = np.sort(rng.uniform(0.2, 0.9, size=K))[::-1]
        second = first * rng.uniform(0.1, 0.9, size=K)
        lam = rng.uniform(0.0, 0.9, size=2)
        params = SystemParams.from_arrays(lam.tolist(), [first.tolist(), second.tolist()], [10.0, 1.0])
        rule = greedy_rule(cmu_order(params))
        expected = 0.5 * (second.sum() - lam.sum())

        assert evaluate_alpha(params, rule, half) == pytest.approx(expected, abs=1e-9)
        assert feasibility_alpha(params, rule).game_value >= expected - 1e-9
