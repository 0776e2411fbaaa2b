"""Seeded simulation of the three attack and compliance scenarios."""

from .config import ScenarioConfig, config_from_dict, load_config
from .metrics import ScenarioMetrics
from .runner import run_all, self_check
from .scenarios import generate_traffic, run_scenario_a, run_scenario_b, run_scenario_c
from .variants import PROFILES, ArchitectureVariant

__all__ = [
    "ArchitectureVariant",
    "PROFILES",
    "ScenarioConfig",
    "ScenarioMetrics",
    "config_from_dict",
    "generate_traffic",
    "load_config",
    "run_all",
    "run_scenario_a",
    "run_scenario_b",
    "run_scenario_c",
    "self_check",
]
