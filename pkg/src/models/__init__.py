"""Instance types, validation, capacity region and report schemas."""

from src.models.capacity import CapacityResult, capacity_contains, split_slack
from src.models.instance import (
    Assignment,
    QueueState,
    SystemParams,
    dump_instance,
    format_pair,
    load_instance,
    parse_instance,
    parse_pair,
)
from src.models.reports import (
    BusyCycleReport,
    ExplorationFrequency,
    InstabilityReport,
    NoExploreOnset,
    RegretReport,
    ReplicationScaling,
    write_report_json,
)
from src.models.validation import ValidationReport, delta_gap, validate

__all__ = [
    # Instance
    "SystemParams",
    "QueueState",
    "Assignment",
    "format_pair",
    "parse_pair",
    "load_instance",
    "parse_instance",
    "dump_instance",
    # Validation and capacity
    "ValidationReport",
    "delta_gap",
    "validate",
    "CapacityResult",
    "capacity_contains",
    "split_slack",
    # Reports
    "RegretReport",
    "ReplicationScaling",
    "InstabilityReport",
    "BusyCycleReport",
    "ExplorationFrequency",
    "NoExploreOnset",
    "write_report_json",
]
