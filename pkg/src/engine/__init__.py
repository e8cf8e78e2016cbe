"""Simulation engine: queue dynamics, traces and busy-cycle logs."""

from src.engine.simulator import (
    CoupledResult,
    RunOptions,
    RunResult,
    coupled_run,
    run,
    serve,
    step,
)
from src.engine.trace import (
    BusyCycleLog,
    TraceRecord,
    busy_cycle_tail_fit,
    write_busy_cycles_csv,
    write_trace_csv,
)
from src.engine.workload import geometric_workload_run

__all__ = [
    # Dynamics
    "step",
    "serve",
    "run",
    "coupled_run",
    "RunOptions",
    "RunResult",
    "CoupledResult",
    "geometric_workload_run",
    # Traces
    "TraceRecord",
    "BusyCycleLog",
    "busy_cycle_tail_fit",
    "write_trace_csv",
    "write_busy_cycles_csv",
]
