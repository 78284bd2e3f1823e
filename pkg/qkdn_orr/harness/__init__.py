from qkdn_orr.harness.compare import ComparisonReport, compare_models
from qkdn_orr.harness.export import export_csv, export_raw, read_csv
from qkdn_orr.harness.scenario import (
    InvalidTrial,
    Scenario,
    ScenarioReport,
    ScenarioRunner,
    TrialRecord,
    run_scenario,
)
from qkdn_orr.harness.stats import Metric, StatRow, aggregate

__all__ = [
    "ComparisonReport",
    "InvalidTrial",
    "Metric",
    "Scenario",
    "ScenarioReport",
    "ScenarioRunner",
    "StatRow",
    "TrialRecord",
    "aggregate",
    "compare_models",
    "export_csv",
    "export_raw",
    "read_csv",
    "run_scenario",
]
