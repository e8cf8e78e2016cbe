"""Experiment harnesses: regret, instability, busy cycles and exploration diagnostics."""

from src.experiments.busy_cycles import busy_cycle_equality
from src.experiments.exploration import (
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

__all__ = [
    # Regret
    "regret_experiment",
    "replication_scaling",
    "horizon_grid",
    "default_genie",
    "write_regret_csv",
    # Instability
    "instability_demo",
    # Busy cycles
    "busy_cycle_equality",
    # Exploration
    "event_probabilities",
    "free_exploration_rate",
    "exploration_event_frequency",
    "no_explore_onset",
    "exploration_onset_study",
]
