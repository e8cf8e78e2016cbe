import csv

import pytest

from src.core.errors import (
    AmbiguousPriorityError,
    ConfigError,
    ContractViolationError,
    NonWorkConservingError,
)
from src.engine.simulator import RunOptions, run
from src.experiments.busy_cycles import busy_cycle_equality
from src.experiments.exploration import (
    cycle_start_probabilities,
    event_probabilities,
    exploration_event_frequency,
    exploration_onset_study,
    free_exploration_rate,
    no_explore_onset,
)
from src.experiments.instability import instability_demo
from src.experiments.regret import (
    default_genie,
    horizon_grid,
    regret_experiment,
    replication_scaling,
    write_regret_csv,
)
from src.models.instance import SystemParams
from src.stability.hierarchy import hierarchical_verdict
from src.stability.networks import instability_example
from src.stability.two_by_two import classify_2x2
from src.stability.verdict import VerdictStatus


def _single_server() -> SystemParams:
    return SystemParams.from_arrays([0.2, 0.15], [[0.8], [0.6]], [1.0, 2.0])


def _two_by_two() -> SystemParams:
    return SystemParams.from_arrays([0.3, 0.2], [[0.6, 0.3], [0.1, 0.9]], [10.0, 1.0])


def test_event_probabilities_example() -> None:
    probs = event_probabilities(_two_by_two())

    assert probs[0] == pytest.approx(0.24**2 * 0.4 * 0.7)
    assert probs[1] == pytest.approx(0.14**2 * 0.9 * 0.1)
    assert free_exploration_rate(_two_by_two()) == pytest.approx(0.001764)


def test_event_probabilities_single_server_ignore_service() -> None:
    params = SystemParams.from_arrays([0.3, 0.2], [[0.5], [0.4]], [1.0, 1.0])

    assert event_probabilities(params) == pytest.approx([0.24, 0.14])


def test_queue_without_arrivals_has_no_free_exploration() -> None:
    params = SystemParams.from_arrays([0.0, 0.2], [[0.5], [0.4]], [1.0, 1.0])

    assert free_exploration_rate(params) == 0.0


def test_cycle_start_probabilities_use_the_fastest_servers() -> None:
    params = SystemParams.from_arrays([0.2, 0.3], [[0.5, 0.4], [0.3, 0.6]], [1.0, 1.0])

    exact = cycle_start_probabilities(params)

    assert exact == pytest.approx([0.14**2 * 0.5, 0.24**2 * 0.4])
    assert all(p >= floor for p, floor in zip(exact, event_probabilities(params)))
    assert cycle_start_probabilities(_single_server()) == pytest.approx(
        event_probabilities(_single_server())
    )


def test_event_frequency_at_simulated_cycle_starts() -> None:
    report = exploration_event_frequency(_two_by_two(), cycles=20_000, seed=3)

    assert report.theta == pytest.approx(0.001764)
    assert report.cycle_probability == pytest.approx([0.02304, 0.00196])
    assert report.cycles >= 20_000
    assert report.within_three_se
    assert report.above_floor


def test_event_frequency_needs_cycles() -> None:
    with pytest.raises(ContractViolationError):
        exploration_event_frequency(_two_by_two(), cycles=0)


def test_horizon_grid_is_increasing_and_ends_at_horizon() -> None:
    grid = horizon_grid(1000, points=4, start=10)

    assert grid[-1] == 1000
    assert grid == sorted(set(grid))
    assert horizon_grid(50)[-1] == 50
    with pytest.raises(ConfigError):
        horizon_grid(0)


def test_default_genie() -> None:
    assert default_genie(_single_server(), "cmuhat-single") == "cmu-greedy-priority"
    assert default_genie(_two_by_two(), "cmuhat-parallel:greedy") == "cmu-greedy-priority"
    assert default_genie(_two_by_two(), "cmuhat-parallel") == "cmu-maxweight"


def test_regret_is_zero_with_one_queue() -> None:
    params = SystemParams.from_arrays([0.4], [[0.6]], [1.0])

    report = regret_experiment(params, "cmuhat-single", horizons=[50, 500], reps=5, seed=2)

    assert report.psi == [0.0, 0.0]
    assert report.stderr == [0.0, 0.0]
    assert report.J == report.J_star


def test_genie_against_itself_has_zero_regret() -> None:
    report = regret_experiment(
        _two_by_two(), "cmu-maxweight", horizons=[100, 300], reps=3, seed=1,
        genie="cmu-maxweight", discount=0.99,
    )

    assert report.psi == [0.0, 0.0]
    assert report.discounted_psi == [0.0, 0.0]
    assert report.queue_gap == [0.0, 0.0]
    assert report.plateau


def test_single_server_learner_regret() -> None:
    report = regret_experiment(_single_server(), "cmuhat-single", horizons=[100, 1000], reps=10, seed=4)

    assert report.genie == "cmu-greedy-priority"
    assert len(report.psi) == 2
    assert all(j > 0 for j in report.J)
    assert report.last_explore_slots == [0] * 10
    assert report.replications == 10


def test_parallel_learner_regret_records_exploration() -> None:
    report = regret_experiment(_two_by_two(), "cmuhat-parallel", horizons=[200, 2000], reps=4, seed=9)

    assert report.genie == "cmu-maxweight"
    assert all(slot > 0 for slot in report.last_explore_slots)
    assert len(report.queue_gap) == 2


def test_parallel_learner_stops_exploring_and_regret_plateaus() -> None:
    params = SystemParams.from_arrays([0.35, 0.5], [[0.5, 0.4], [0.3, 0.6]], [3.0, 1.0])
    assert hierarchical_verdict(params).status is VerdictStatus.GEOMETRICALLY_ERGODIC

    report = regret_experiment(
        params, "cmuhat-parallel", horizons=[15_000, 30_000, 60_000], reps=4, seed=12
    )

    assert all(0 < slot < 30_000 for slot in report.last_explore_slots)
    assert report.plateau
    assert report.queue_gap[-1] == 0.0


def test_regret_rejects_mismatched_learner() -> None:
    with pytest.raises(ConfigError):
        regret_experiment(_two_by_two(), "cmuhat-single", horizons=[10], reps=1)
    with pytest.raises(ConfigError):
        regret_experiment(_single_server(), "cmuhat-single", horizons=[10], reps=1, gap_times=[20])


def test_regret_needs_unambiguous_cmu_rule() -> None:
    tied = SystemParams.from_arrays([0.2, 0.2], [[0.5], [0.5]], [1.0, 1.0])

    with pytest.raises(AmbiguousPriorityError):
        regret_experiment(tied, "cmuhat-single", horizons=[10], reps=1)


def test_regret_csv(tmp_path) -> None:
    report = regret_experiment(_single_server(), "cmuhat-single", horizons=[20, 40], reps=2, seed=0)

    path = write_regret_csv(report, tmp_path / "regret.csv")

    with open(path, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["T", "J", "J_star", "psi", "stderr"]
    assert [int(r[0]) for r in rows[1:]] == [20, 40]


def test_replication_scaling_reports_each_count() -> None:
    scaling = replication_scaling(_single_server(), "cmuhat-single", 200, reps_list=(4, 8), seed=1)

    assert scaling.reps == [4, 8]
    assert len(scaling.stderr) == 2
    assert all(se >= 0 for se in scaling.stderr)
    assert len(scaling.scaled) == 2


def test_instability_demo_detects_growth() -> None:
    unstable, _ = instability_example()

    report = instability_demo(unstable, horizon=20_000, reps=5, seed=5)

    assert report.slope_mean > 0.05
    assert report.excludes_zero
    assert report.capacity_inside
    assert report.threshold == pytest.approx(0.6941, abs=1e-3)
    assert report.fraction_above == 1.0


def test_instability_demo_growth_is_significant_per_replication() -> None:
    unstable, _ = instability_example()

    report = instability_demo(unstable, horizon=10_000, reps=20, seed=17)

    assert report.significant_growth >= 18
    assert report.capacity_inside


@pytest.mark.parametrize("offset", [-0.05, 0.05])
def test_simulated_growth_agrees_with_threshold(offset: float) -> None:
    unstable, _ = instability_example()
    threshold = classify_2x2(unstable).per_level_margins[1].service_rate
    shifted = unstable.with_lambda([0.5, threshold + offset])

    report = instability_demo(shifted, horizon=20_000, reps=5, seed=23, require_unstable=False)

    if offset > 0:
        assert report.ci_low > 0
        assert report.slope_mean == pytest.approx(offset, abs=0.02)
    else:
        assert abs(report.slope_mean) < 0.005


def test_instability_demo_on_stable_sibling() -> None:
    _, sibling = instability_example()

    with pytest.raises(ContractViolationError):
        instability_demo(sibling, horizon=1000, reps=1, seed=0)
    report = instability_demo(sibling, horizon=20_000, reps=3, seed=5, require_unstable=False)
    assert abs(report.slope_mean) < 0.005


def test_instability_demo_needs_a_horizon() -> None:
    unstable, _ = instability_example()

    with pytest.raises(ContractViolationError):
        instability_demo(unstable, horizon=3, reps=1, seed=0)


def test_work_conserving_rules_share_busy_cycles() -> None:
    report = busy_cycle_equality(
        _single_server(), ["cmu-greedy-priority", "static-priority:2-1,1-1", "cmuhat-single"], 5000, 8
    )

    assert report.equal
    assert report.first_mismatch is None
    assert len(set(report.cycle_counts)) == 1
    assert report.cycle_counts[0] > 100


def test_busy_cycles_reject_exploring_learner() -> None:
    with pytest.raises(NonWorkConservingError):
        busy_cycle_equality(_single_server(), ["cmu-greedy-priority", "cmuhat-parallel"], 100, 0)


def test_exploration_stops_well_before_horizon() -> None:
    params = SystemParams.from_arrays([0.5], [[0.9]], [1.0])
    result = run(params, "cmuhat-parallel", 20_000, 6, RunOptions())

    onset = no_explore_onset(result, params)

    assert onset.explore_count > 0
    assert onset.ceased_before_half
    assert onset.enough_samples
    assert onset.n_min == sorted(onset.n_min)


def test_no_explore_onset_needs_a_trace() -> None:
    params = SystemParams.from_arrays([0.5], [[0.9]], [1.0])
    result = run(params, "cmuhat-parallel", 100, 0, RunOptions(record_trace=False))

    with pytest.raises(ContractViolationError):
        no_explore_onset(result, params)


def test_exploration_onset_study_runs_each_replication() -> None:
    onsets = exploration_onset_study(_two_by_two(), horizon=500, reps=2, seed=1)

    assert len(onsets) == 2
    assert all(o.horizon == 500 for o in onsets)
