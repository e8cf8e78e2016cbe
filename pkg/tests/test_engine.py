import csv

import numpy as np
import pytest

from src.core.errors import ContractViolationError, NonWorkConservingError
from src.core.streams import StreamHandle, StreamPurpose, UniformSequence, derive_seed
from src.engine.simulator import RunOptions, coupled_run, run, step
from src.engine.trace import BusyCycleLog, busy_cycle_tail_fit, write_busy_cycles_csv, write_trace_csv
from src.engine.workload import geometric_workload_run
from src.models.instance import Assignment, QueueState, SystemParams
from src.stability.stationary import single_queue_kernel, stationary_truncated


def _two_queue_single_server() -> SystemParams:
    return SystemParams.from_arrays([0.2, 0.15], [[0.8], [0.6]], [1.0, 2.0])


class _IdlePolicy:
    name = "idle"
    work_conserving = True

    def decide(self, t, state):
        return Assignment(), False

    def observe(self, assignment, successes):
        pass


def test_step_adds_arrivals_to_empty_system() -> None:
    assert step(QueueState((0, 0)), Assignment(), (1, 0), frozenset()).q == (1, 0)


def test_step_removes_served_jobs_then_adds_arrivals() -> None:
    successes = frozenset({(0, 0), (0, 1)})

    nxt = step(QueueState((2, 1)), Assignment(successes), (0, 1), successes)

    assert nxt.q == (0, 2)


def test_step_only_counts_successes() -> None:
    assignment = Assignment.of([(0, 0), (1, 1)])

    nxt = step(QueueState((1, 1)), assignment, (1, 0), frozenset({(1, 1)}))

    assert nxt.q == (2, 0)


def test_step_rejects_overloaded_queue() -> None:
    assignment = Assignment.of([(0, 0), (0, 1)])

    with pytest.raises(ContractViolationError):
        step(QueueState((1, 0)), assignment, (0, 0), frozenset())


def test_streams_are_addressable_and_independent() -> None:
    handle = StreamHandle(seed=7, purpose=StreamPurpose.SERVICE, indices=(0,))
    other = StreamHandle(seed=7, purpose=StreamPurpose.SERVICE, indices=(1,))

    first = UniformSequence(handle)
    again = UniformSequence(handle, block_size=4)

    assert [first[n] for n in (1, 5, 2000)] == [again[n] for n in (1, 5, 2000)]
    assert not np.array_equal(handle.block(0), other.block(0))
    assert derive_seed(3, 0) != derive_seed(3, 1)
    assert derive_seed(3, 1) == derive_seed(3, 1)


def test_run_without_arrivals_stays_empty() -> None:
    params = SystemParams.from_arrays([0.0], [[0.5]], [1.0])

    result = run(params, "cmu-greedy-priority", horizon=50, seed=1)

    assert result.cum_cost == 0.0
    assert all(record.q == (0,) for record in result.trace)
    assert len(result.trace) == 50


def test_run_is_reproducible() -> None:
    params = SystemParams.from_arrays([0.4, 0.3], [[0.7, 0.1], [0.1, 0.6]], [2.0, 1.0])

    a = run(params, "cmuhat-parallel", horizon=400, seed=9)
    b = run(params, "cmuhat-parallel", horizon=400, seed=9)

    assert a.trace == b.trace
    assert a.cum_cost == b.cum_cost


def test_run_cost_matches_queue_path() -> None:
    params = _two_queue_single_server()

    result = run(params, "cmu-greedy-priority", horizon=300, seed=4)

    assert result.cum_cost == pytest.approx(float((result.queue_path @ params.cost_array).sum()))
    for record in result.trace:
        assert record.successes <= record.assignment.pairs


def test_single_queue_mean_matches_stationary_law() -> None:
    params = SystemParams.from_arrays([0.3], [[0.6]], [1.0])
    dist = stationary_truncated(single_queue_kernel(0.3, [0.6]), 200)

    result = run(params, "cmu-greedy-priority", 100_000, seed=2, options=RunOptions(record_trace=False))

    assert result.queue_path.mean() == pytest.approx(dist.mean(), rel=0.05)


def test_service_success_rate_matches_mu() -> None:
    params = SystemParams.from_arrays([0.45], [[0.5]], [1.0])

    result = run(params, "cmu-greedy-priority", 40_000, seed=5)
    scheduled = sum(len(r.assignment) for r in result.trace)
    served = sum(len(r.successes) for r in result.trace)
    rate = served / scheduled

    assert abs(rate - 0.5) < 3 * np.sqrt(0.25 / scheduled)


def test_discounted_cost_is_reported() -> None:
    params = _two_queue_single_server()

    result = run(params, "cmu-greedy-priority", 200, seed=3, options=RunOptions(discount=0.9))
    weights = 0.9 ** np.arange(1, 201)

    assert result.discounted_cost == pytest.approx(float(weights @ result.slot_costs))


def test_run_rejects_bad_discount() -> None:
    with pytest.raises(ContractViolationError):
        run(_two_queue_single_server(), "cmu-greedy-priority", 10, 1, RunOptions(discount=1.5))


def test_coupled_identical_schedulers_give_identical_paths() -> None:
    params = SystemParams.from_arrays([0.4, 0.3], [[0.7, 0.1], [0.1, 0.6]], [2.0, 1.0])

    result = coupled_run(params, "cmu-maxweight", "cmu-maxweight", 500, seed=8)

    assert result.a.trace == result.b.trace


def test_coupled_priority_rule_is_monotone_in_initial_state() -> None:
    params = SystemParams.from_arrays([0.5, 0.6], [[0.6, 0.3], [0.1, 0.9]], [10.0, 1.0])

    result = coupled_run(
        params, "cmu-greedy-priority", "cmu-greedy-priority", 3000, seed=12,
        options=RunOptions(initial_state=(0, 0), record_trace=False), initial_state_b=(3, 2),
    )

    assert (result.a.queue_path <= result.b.queue_path).all()


def test_busy_cycle_log_excludes_initial_segment() -> None:
    log = BusyCycleLog.from_totals([2, 1, 0, 1, 0, 0, 3, 0])

    assert log.zero_hit_times == (3, 5, 6, 8)
    assert log.initial_segment == 2
    assert log.cycle_lengths == [2, 1, 2]


def test_geometric_workload_priority_orders_share_busy_cycles() -> None:
    params = _two_queue_single_server()

    logs = geometric_workload_run(
        params, ["static-priority:1-1,2-1", "static-priority:2-1,1-1"], 10_000, seed=21
    )

    assert logs[0].cycle_lengths == logs[1].cycle_lengths
    assert len(logs[0].cycle_lengths) > 100


def test_geometric_workload_learner_matches_genie() -> None:
    params = _two_queue_single_server()

    genie, learner = geometric_workload_run(params, ["cmu-greedy-priority", "cmuhat-single"], 5000, 6)

    assert genie.zero_hit_times == learner.zero_hit_times


def test_geometric_workload_rejects_idle_scheduler() -> None:
    with pytest.raises(NonWorkConservingError):
        geometric_workload_run(
            _two_queue_single_server(), [lambda params, seed: _IdlePolicy()], 100, 1
        )


def test_geometric_workload_needs_single_server() -> None:
    params = SystemParams.from_arrays([0.2], [[0.5, 0.5]], [1.0])

    with pytest.raises(ContractViolationError):
        geometric_workload_run(params, ["cmu-maxweight"], 100, 1)


def test_busy_cycle_tail_is_geometric() -> None:
    params = _two_queue_single_server()

    (log,) = geometric_workload_run(params, ["cmu-greedy-priority"], 20_000, seed=17)
    slope, r_squared = busy_cycle_tail_fit(log)

    assert slope < 0
    assert r_squared > 0.9


def test_trace_and_cycle_csv_exports(tmp_path) -> None:
    params = _two_queue_single_server()
    result = run(params, "cmu-greedy-priority", 120, seed=2)

    write_trace_csv(tmp_path / "trace.csv", result.trace, params.num_queues)
    write_busy_cycles_csv(tmp_path / "cycles.csv", result.busy)

    with open(tmp_path / "trace.csv", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "q_1", "q_2", "a_1", "a_2", "assign", "served", "slot_cost", "explored"]
    assert len(rows) == 121
    cycles = (tmp_path / "cycles.csv").read_text().splitlines()
    assert cycles[0] == "cycle_index,length"
    assert len(cycles) == len(result.busy.cycle_lengths) + 1
