"""Scenario configuration: one declarative document fully determines a run."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..errors import ConfigError
from ..policy import RegimeRegistry
from ..routing import RegionGraph

_REQUIRED = ("registry", "graph", "traffic", "attack", "privacy", "cost_model")


def default_config_text() -> str:
    return resources.files("xborder").joinpath("data/default_scenario.yaml").read_text(encoding="utf-8")


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


@dataclass(frozen=True)
class ScenarioConfig:
    raw: Mapping
    registry: RegimeRegistry
    graph: RegionGraph
    seed: int

    @property
    def traffic(self) -> Mapping:
        return self.raw["traffic"]

    @property
    def attack(self) -> Mapping:
        return self.raw["attack"]

    @property
    def privacy(self) -> Mapping:
        return self.raw["privacy"]

    @property
    def cost_model(self) -> Mapping:
        return self.raw["cost_model"]

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()

    def with_overrides(self, seed: int | None = None, **sections) -> "ScenarioConfig":
        """Copy with a new seed and/or shallow-merged section overrides."""
        raw = copy.deepcopy(dict(self.raw))
        if seed is not None:
            raw["seed"] = int(seed)
        for name, patch in sections.items():
            merged = dict(raw.get(name, {}))
            merged.update(patch)
            raw[name] = merged
        return config_from_dict(raw)


def _check_fraction(section: Mapping, key: str, where: str):
    v = section.get(key)
    if not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
        raise ConfigError(f"{where}.{key} must be a number in [0, 1], got {v!r}")


def config_from_dict(doc: Mapping) -> ScenarioConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("scenario config must be a mapping")
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise ConfigError(f"scenario config missing sections: {', '.join(missing)}")
    raw = json.loads(canonical_json(doc))
    registry = RegimeRegistry.from_dict(raw["registry"])
    graph = RegionGraph.from_dict(raw["graph"])
    graph.validate_against(registry)

    traffic = raw["traffic"]
    for key in ("scenario_a_transfers", "scenario_c_transfers", "probabilistic_transfers", "payload_bytes"):
        if not isinstance(traffic.get(key), int) or traffic[key] < 0:
            raise ConfigError(f"traffic.{key} must be a non-negative integer")
    if traffic["payload_bytes"] < 1:
        raise ConfigError("traffic.payload_bytes must be >= 1")
    for key in ("interception_rate", "fl_leak_probability", "localization_coverage", "misclassification_rate"):
        _check_fraction(raw["attack"], key, "attack")
    priv = raw["privacy"]
    for key in ("base_memorization", "false_flag_rate"):
        _check_fraction(priv, key, "privacy")
    for code in priv.get("attacker_jurisdictions", ()):
        registry.jurisdiction(code)
    if not priv.get("account_epsilon_total", 0) > 0:
        raise ConfigError("privacy.account_epsilon_total must be positive")
    for name, row in priv.get("rows", {}).items():
        if row.get("mode") not in ("NoDP", "TrainTimeDP", "InferenceDP"):
            raise ConfigError(f"privacy.rows.{name}.mode must be NoDP, TrainTimeDP or InferenceDP")
        _check_fraction(row, "damping", f"privacy.rows.{name}")
        _check_fraction(row, "background_degradation", f"privacy.rows.{name}")
    mult = raw["cost_model"].get("multipliers", {})
    for key in ("routing_per_plan", "encryption_per_layer", "escrow_per_key", "dp_per_transfer", "proof_per_assertion"):
        if not isinstance(mult.get(key), (int, float)) or mult[key] < 0:
            raise ConfigError(f"cost_model.multipliers.{key} must be a non-negative number")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return ScenarioConfig(raw, registry, graph, seed)


def load_config(path=None) -> ScenarioConfig:
    """Load a scenario file, or the packaged default when ``path`` is None."""
    if path is None:
        text, where = default_config_text(), "<default>"
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        text, where = p.read_text(encoding="utf-8"), str(p)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{where}: invalid YAML ({exc})") from exc
    try:
        return config_from_dict(doc)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
