"""Scenario files, the run pipeline, result files and the command line."""

from .config import ScenarioConfig, ScenarioParseError, load_scenario, parse_scenario
from .output import bundle_to_dict, emit, read_csv_masses
from .runner import ResultBundle, run_scenario
from .scenarios import list_scenarios, resolve_scenario

__all__ = [
    "ResultBundle",
    "ScenarioConfig",
    "ScenarioParseError",
    "bundle_to_dict",
    "emit",
    "list_scenarios",
    "load_scenario",
    "parse_scenario",
    "read_csv_masses",
    "resolve_scenario",
    "run_scenario",
]
