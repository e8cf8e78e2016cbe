import itertools
import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.errors import ConfigError, InvalidAssignmentError
from src.models.capacity import capacity_contains, split_slack
from src.models.instance import (
    Assignment,
    QueueState,
    SystemParams,
    dump_instance,
    format_pair,
    load_instance,
    parse_pair,
)
from src.models.validation import validate


def _make_params(lam, mu, cost=None) -> SystemParams:
    return SystemParams.from_arrays(lam, mu, cost or [1.0] * len(lam))


def _brute_force_gap(params: SystemParams) -> float:
    w = params.weights()
    mu = params.mu_array
    U, K = mu.shape
    gap = math.inf
    for i, j in itertools.product(range(U), range(K)):
        if mu[i, j] == 0.0:
            continue
        for other in range(U):
            if other != i:
                gap = min(gap, abs(w[i, j] - w[other, j]))
        for other in range(K):
            if other != j:
                gap = min(gap, abs(w[i, j] - w[i, other]))
    return gap


def test_validate_single_link_has_infinite_gap() -> None:
    report = validate(_make_params([0.3], [[0.5]]))

    assert report.delta_gap == math.inf
    assert report.is_cmu_well_defined


def test_validate_exact_tie_is_not_well_defined() -> None:
    report = validate(_make_params([0.2, 0.2], [[0.5], [0.5]]))

    assert report.delta_gap == 0.0
    assert not report.is_cmu_well_defined
    assert any("tie" in w for w in report.warnings)


def test_validate_gap_matches_enumeration() -> None:
    params = _make_params([0.2, 0.2], [[0.7, 0.6], [0.1, 0.4]], [2.0, 1.0])

    report = validate(params)

    assert report.delta_gap == pytest.approx(0.2)
    assert report.delta_gap == _brute_force_gap(params)


def test_validate_warns_about_unservable_queue_and_zero_arrivals() -> None:
    report = validate(_make_params([0.0, 0.2], [[0.5], [0.0]], [2.0, 1.0]))

    assert len(report.warnings) == 2


def test_system_params_rejects_out_of_range_rates() -> None:
    with pytest.raises(ValidationError):
        _make_params([1.0], [[0.5]])
    with pytest.raises(ValidationError):
        _make_params([0.3], [[1.5]])
    with pytest.raises(ValidationError):
        _make_params([0.3], [[0.5]], [0.0])


def test_system_params_rejects_shape_mismatch() -> None:
    with pytest.raises(ValidationError):
        SystemParams(U=2, K=1, **{"lambda": [0.1]}, mu=[[0.5], [0.5]], cost=[1.0, 1.0])


def test_capacity_identity_split_certifies_inside() -> None:
    params = _make_params([0.4, 0.3], [[0.7, 0.1], [0.1, 0.6]])

    result = capacity_contains(params)

    assert result.inside
    assert result.margin > 0
    assert split_slack(params, np.eye(2)).min() > 0
    assert result.witness.sum(axis=1) == pytest.approx([1.0, 1.0])


def test_capacity_single_link_outside() -> None:
    result = capacity_contains(_make_params([0.9], [[0.5]]))

    assert not result.inside
    assert result.margin == pytest.approx(-0.4)


def test_capacity_shared_server_outside() -> None:
    result = capacity_contains(_make_params([0.3, 0.3], [[0.5], [0.5]]))

    assert not result.inside
    assert result.margin == pytest.approx(-0.05)


def test_capacity_witness_reproduces_margin() -> None:
    params = _make_params([0.3, 0.5, 0.2], [[0.6, 0.0], [0.5, 0.5], [0.0, 0.7]])

    result = capacity_contains(params)

    assert split_slack(params, result.witness).min() == pytest.approx(result.margin, abs=1e-9)


def test_capacity_is_monotone_in_arrival_rates() -> None:
    params = _make_params([0.4, 0.3], [[0.7, 0.1], [0.1, 0.6]])
    rng = np.random.default_rng(11)

    for _ in range(20):
        lower = params.lam_array * rng.uniform(0.0, 1.0, size=2)
        assert capacity_contains(params.with_lambda(lower)).inside


def test_assignment_check_rejects_shared_server() -> None:
    assignment = Assignment.of([(0, 0), (1, 0)])

    with pytest.raises(InvalidAssignmentError):
        assignment.check(QueueState((1, 1)), 2)


def test_assignment_check_rejects_overload() -> None:
    with pytest.raises(InvalidAssignmentError):
        Assignment.of([(0, 0), (0, 1)]).check(QueueState((1, 0)), 2)


def test_pair_labels_are_one_based() -> None:
    assert format_pair((0, 1)) == "1-2"
    assert parse_pair("2-3") == (1, 2)
    with pytest.raises(ValueError):
        parse_pair("0-1")


def test_load_instance_missing_file_names_path(tmp_path) -> None:
    missing = tmp_path / "nope.json"

    with pytest.raises(ConfigError, match="nope.json"):
        load_instance(missing)


def test_load_instance_rejects_malformed_matrix(tmp_path) -> None:
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"U": 2, "K": 2, "lambda": [0.1, 0.2], "mu": [[0.5]], "cost": [1, 1]}))

    with pytest.raises(ConfigError, match="bad.json"):
        load_instance(path)


def test_dump_instance_is_readable(tmp_path) -> None:
    params = _make_params([0.4, 0.3], [[0.7, 0.1], [0.1, 0.6]], [2.0, 1.0])
    path = tmp_path / "instance.json"

    dump_instance(params, path)

    assert load_instance(path) == params
    assert set(json.loads(path.read_text())) >= {"U", "K", "lambda", "mu", "cost"}
