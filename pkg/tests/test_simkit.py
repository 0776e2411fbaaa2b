from __future__ import annotations

import pytest

from xborder.errors import ConfigError
from xborder.simkit import PROFILES, ArchitectureVariant, config_from_dict, generate_traffic, load_config
from xborder.simkit import posthoc
from xborder.simkit.report import parse_csv, render_csv, render_text, table_rows
from xborder.simkit.scenarios import misclassify, run_scenario_b


def test_default_config_loads_and_hashes_stably(config):
    assert config.config_hash == load_config().config_hash
    assert config.with_overrides(seed=1).config_hash != config.config_hash


def test_missing_config_names_path(tmp_path):
    with pytest.raises(ConfigError, match="nope.yaml"):
        load_config(tmp_path / "nope.yaml")


def test_invalid_yaml(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("registry: [unclosed\n")
    with pytest.raises(ConfigError, match="bad.yaml"):
        load_config(p)


@pytest.mark.parametrize("section,patch,match", [
    ("attack", {"interception_rate": 1.5}, "interception_rate"),
    ("traffic", {"payload_bytes": 0}, "payload_bytes"),
    ("privacy", {"attacker_jurisdictions": ["ZZ"]}, "ZZ"),
    ("cost_model", {"multipliers": {}}, "routing_per_plan"),
])
def test_bad_sections_rejected(config, section, patch, match):
    with pytest.raises((ConfigError, KeyError), match=match):
        config.with_overrides(**{section: patch})


def test_missing_section(config):
    raw = dict(config.raw)
    del raw["attack"]
    with pytest.raises(ConfigError, match="attack"):
        config_from_dict(raw)


def test_variant_parse():
    assert ArchitectureVariant.parse("proposed") is ArchitectureVariant.PROPOSED
    with pytest.raises(ValueError):
        ArchitectureVariant.parse("Quantum")


def test_only_proposed_enables_all_mechanisms():
    assert len(PROFILES[ArchitectureVariant.PROPOSED].mechanisms) == 4
    for v in ArchitectureVariant:
        if v is not ArchitectureVariant.PROPOSED:
            assert PROFILES[v].mechanisms == ()


def test_traffic_is_seeded(config):
    import numpy as np

    a = generate_traffic(config, 50, np.random.default_rng([1, 2]))
    b = generate_traffic(config, 50, np.random.default_rng([1, 2]))
    assert a == b
    assert all(config.graph.jurisdiction_of(p.origin_region) == p.origin for p in a)


def test_misclassification_makes_transfer_look_domestic(registry):
    from xborder.policy import DataPacket, SensitivityClass, evaluate_transfer

    p = DataPacket("p", "CN", "EU", "CN", SensitivityClass.CONFIDENTIAL, b"x")
    assert posthoc.transfer_denied(registry, p)
    assert evaluate_transfer(misclassify(p), registry).allowed


def test_posthoc_agrees_with_policy_engine(registry):
    import itertools

    from xborder.policy import DataPacket, SensitivityClass, evaluate_transfer

    for o, d, s, c in itertools.product(registry.codes, registry.codes, registry.codes, SensitivityClass):
        p = DataPacket("p", o, d, s, c, b"x")
        assert posthoc.transfer_denied(registry, p) == (not evaluate_transfer(p, registry).allowed)


def test_unknown_privacy_row(config):
    with pytest.raises(ConfigError):
        run_scenario_b(config, "NoSuchRow")


def test_twelve_metric_sets(full_run):
    cells = full_run["results"]["cells"]
    assert len(cells) == 12
    assert {c["scenario"] for c in cells} == {"A", "B", "C"}
    assert [c["variant"] for c in full_run["results"]["reference_cells"]] == ["TrainTimeDP"]


def test_table_shapes(full_run):
    rows = table_rows(full_run["results"])
    per_table = {t: {r for tt, r, _, _ in rows if tt == t} for t in ("I", "II", "III")}
    assert len(per_table["I"]) == 4 and len(per_table["II"]) == 5 and len(per_table["III"]) == 4


def test_csv_round_trip(full_run):
    results = full_run["results"]
    assert parse_csv(render_csv(results)) == table_rows(results)


def test_rendered_text_matches_values(full_run):
    text = render_text(full_run["results"], full_run["measured"])
    for table, row, metric, value in table_rows(full_run["results"]):
        if table == "I" and metric == "plaintext_recovered_pct":
            assert f"{value:.2f}" in text
        if table == "II" and metric == "pii_per_1000":
            assert f"{value:.2f}" in text
    assert full_run["results"]["config_hash"] in text


def test_empty_results_render_headers():
    empty = {"config_hash": "0" * 64, "seed": 0, "cells": []}
    text = render_text(empty)
    assert "Table I" in text and "Table II" in text and "Table III" in text
    assert parse_csv(render_csv(empty)) == []


def test_csv_parse_errors_carry_location():
    with pytest.raises(ValueError, match="line 1"):
        parse_csv("nope\n")
    with pytest.raises(ValueError, match="line 3"):
        parse_csv("table,row,metric,value\nI,a,b,1.0\nI,a,b,oops\n")
