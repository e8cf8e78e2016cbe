"""Subcommand implementations.

Each command takes a validated RunConfig, writes its artifacts into ``run_config.out``
and returns (exit code, one-line summary dict).
"""

import json
import logging
from pathlib import Path

from src.core.config import ensure_output_dir
from src.core.errors import StructureError
from src.core.run_config import RunConfig
from src.engine.simulator import RunOptions, run
from src.engine.trace import write_busy_cycles_csv, write_trace_csv
from src.experiments.busy_cycles import busy_cycle_equality
from src.experiments.instability import instability_demo
from src.experiments.regret import horizon_grid, regret_experiment, write_regret_csv
from src.models.capacity import capacity_contains
from src.models.instance import SystemParams
from src.models.reports import write_report_json
from src.schedulers.matching import PriorityOrder, cmu_order
from src.stability.hierarchy import TruncationConfig, hierarchical_verdict
from src.stability.networks import instability_example
from src.stability.rates import feasibility_alpha, greedy_rule
from src.stability.two_by_two import classify_2x2
from src.stability.verdict import StabilityVerdict, VerdictStatus, write_verdict_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ANALYSIS = 3

Summary = dict[str, object]


def _out(run_config: RunConfig) -> Path:
    return ensure_output_dir(Path(run_config.out))


def cmd_simulate(run_config: RunConfig) -> tuple[int, Summary]:
    """Simulate one path; writes ``trace.csv`` and ``busy_cycles.csv``."""
    params = run_config.resolve_params()
    result = run(
        params, run_config.scheduler, run_config.horizon, run_config.seed,
        RunOptions(discount=run_config.discount),
    )
    out = _out(run_config)
    write_trace_csv(out / "trace.csv", result.trace, params.num_queues)
    write_busy_cycles_csv(out / "busy_cycles.csv", result.busy)
    summary: Summary = {
        "command": "simulate",
        "scheduler": result.scheduler,
        "cum_cost": result.cum_cost,
        "final_state": list(result.final_state),
        "cycles": len(result.busy.cycle_lengths),
        "trace": str(out / "trace.csv"),
    }
    if result.discounted_cost is not None:
        summary["discounted_cost"] = result.discounted_cost
    return EXIT_OK, summary


def cmd_regret(run_config: RunConfig) -> tuple[int, Summary]:
    """Regret curve; writes ``regret.json`` and ``regret.csv``.

    ``--scheduler`` names the learner when given; otherwise the config's ``learner``.
    """
    params = run_config.resolve_params()
    learner = (
        run_config.scheduler if "scheduler" in run_config.model_fields_set else run_config.learner
    )
    report = regret_experiment(
        params,
        learner,
        horizons=horizon_grid(run_config.horizon),
        reps=run_config.reps,
        seed=run_config.seed,
        discount=run_config.discount,
        genie=run_config.genie,
        workers=run_config.workers,
    )
    out = _out(run_config)
    write_report_json(report, out / "regret.json")
    write_regret_csv(report, out / "regret.csv")
    return EXIT_OK, {
        "command": "regret",
        "learner": report.learner,
        "genie": report.genie,
        "T": report.horizons[-1],
        "psi": report.psi[-1],
        "stderr": report.stderr[-1],
        "plateau": report.plateau,
    }


def _priority(run_config: RunConfig, params: SystemParams) -> PriorityOrder:
    if run_config.priority:
        return PriorityOrder.parse(run_config.priority, params.num_queues, params.num_servers)
    return cmu_order(params)


def _feasibility_verdict(params: SystemParams, order: PriorityOrder, reason: str,
                         tolerance: float) -> StabilityVerdict:
    result = feasibility_alpha(params, greedy_rule(order), tolerance)
    passed = result.alpha is not None
    return StabilityVerdict(
        status=VerdictStatus.GEOMETRICALLY_ERGODIC if passed else VerdictStatus.INCONCLUSIVE,
        method="feasibility",
        alpha_witness=None if result.alpha_positive is None else result.alpha_positive.tolist(),
        diagnostics=[reason, f"drift game value {result.game_value:.6g}"],
    )


def stability_verdict(run_config: RunConfig, params: SystemParams) -> StabilityVerdict:
    """2×2 region when it applies, else the hierarchical check, else the drift game."""
    tolerance = run_config.tolerance
    if params.num_queues == 2 and params.num_servers == 2 and not run_config.priority:
        try:
            return classify_2x2(params, tolerance)
        except StructureError as e:
            logger.info(f"2x2 region does not apply ({e}); trying the hierarchical check")

    order = _priority(run_config, params)
    truncation = TruncationConfig.from_config()
    if run_config.truncation is not None:
        truncation = TruncationConfig(
            scalar=run_config.truncation,
            joint=run_config.truncation,
            budget=truncation.budget,
            boundary_tolerance=truncation.boundary_tolerance,
        )
    try:
        return hierarchical_verdict(params, sigma=order, truncation=truncation, tolerance=tolerance)
    except StructureError as e:
        logger.info(f"falling back to the drift feasibility test: {e}")
        return _feasibility_verdict(params, order, str(e), tolerance)


def cmd_stability(run_config: RunConfig) -> tuple[int, Summary]:
    """Classify the instance; writes ``verdict.json``."""
    params = run_config.resolve_params()
    verdict = stability_verdict(run_config, params)
    write_verdict_json(verdict, _out(run_config) / "verdict.json")
    code = EXIT_OK
    if run_config.strict and verdict.status is VerdictStatus.INCONCLUSIVE:
        code = EXIT_ANALYSIS
    return code, {
        "command": "stability",
        "status": str(verdict.status),
        "method": verdict.method,
        "margins": verdict.margins,
        "levels": len({m.level for m in verdict.per_level_margins}),
    }


def cmd_capacity(run_config: RunConfig) -> tuple[int, Summary]:
    """Capacity-region membership; writes ``capacity.json``."""
    params = run_config.resolve_params()
    result = capacity_contains(params)
    data = {
        "inside": result.inside,
        "margin": result.margin,
        "on_boundary": result.on_boundary,
        "witness": result.witness.tolist(),
    }
    path = _out(run_config) / "capacity.json"
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return EXIT_OK, {"command": "capacity", "inside": result.inside, "margin": result.margin}


def cmd_demo_instability(run_config: RunConfig) -> tuple[int, Summary]:
    """Instability demo on the configured instance or the built-in example."""
    has_instance = run_config.params is not None or run_config.instance is not None
    params = run_config.resolve_params() if has_instance else instability_example()[0]
    report = instability_demo(params, run_config.horizon, run_config.reps, run_config.seed)
    write_report_json(report, _out(run_config) / "instability.json")
    return EXIT_OK, {
        "command": "demo-instability",
        "slope": report.slope_mean,
        "ci": [report.ci_low, report.ci_high],
        "excludes_zero": report.excludes_zero,
        "capacity_inside": report.capacity_inside,
    }


def _default_comparison(run_config: RunConfig, params: SystemParams) -> list[str]:
    reverse = [(i, 0) for i in reversed(range(params.num_queues)) if params.mu[i][0] > 0.0]
    names = [run_config.scheduler]
    if reverse:
        names.append("static-priority:" + PriorityOrder(tuple(reverse)).to_text())
    names.append("cmuhat-single")
    return names


def cmd_busy_cycle_check(run_config: RunConfig) -> tuple[int, Summary]:
    """Busy-cycle equality across schedulers; writes ``busy_cycles.json``."""
    params = run_config.resolve_params()
    schedulers = run_config.compare or _default_comparison(run_config, params)
    report = busy_cycle_equality(params, schedulers, run_config.horizon, run_config.seed)
    write_report_json(report, _out(run_config) / "busy_cycles.json")
    return (EXIT_OK if report.equal else EXIT_ANALYSIS), {
        "command": "busy-cycle-check",
        "equal": report.equal,
        "schedulers": report.schedulers,
        "cycles": report.cycle_counts[0],
    }


COMMANDS = {
    "simulate": cmd_simulate,
    "regret": cmd_regret,
    "stability": cmd_stability,
    "capacity": cmd_capacity,
    "demo-instability": cmd_demo_instability,
    "busy-cycle-check": cmd_busy_cycle_check,
}
