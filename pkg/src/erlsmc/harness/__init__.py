"""Scenario engine, metrics, CSV/plot export and CLI."""

from .engine import ReferenceShaper, run_scenario
from .metrics import LawComparison, Metrics, compare_laws, compute_metrics, sweep
from .plots import emit_plots
from .scenario import ConfigError, Scenario, build_scenario, load_scenario
from .trace import FIELDS, Trace, TraceIOError, export_csv, read_csv

__all__ = [
    "ConfigError", "FIELDS", "LawComparison", "Metrics", "ReferenceShaper", "Scenario",
    "Trace", "TraceIOError", "build_scenario", "compare_laws", "compute_metrics",
    "emit_plots", "export_csv", "load_scenario", "read_csv", "run_scenario", "sweep",
]
