"""Run every (scenario, variant) cell and write the result bundle."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .. import audit
from .config import ScenarioConfig, canonical_json, config_from_dict
from .scenarios import run_scenario_a, run_scenario_b, run_scenario_c
from .variants import REFERENCE_ROWS, ArchitectureVariant

log = logging.getLogger(__name__)

SCENARIOS = ("A", "B", "C")
_RUNNERS = {"A": run_scenario_a, "B": run_scenario_b, "C": run_scenario_c}


def _cells(scenarios, variants):
    cells = [(s, v.value) for s in scenarios for v in variants]
    if "B" in scenarios:
        cells += [("B", row) for row in REFERENCE_ROWS]
    return cells


def _run_cell(raw: dict, scenario: str, variant: str):
    config = config_from_dict(raw)
    if scenario == "C":
        m = run_scenario_c(config, variant, keep_log=True)
        tree = m.measured.pop("_log")
        return m, list(tree.records)
    return _RUNNERS[scenario](config, variant), None


def run_all(config: ScenarioConfig, scenarios=SCENARIOS, variants=None, out_dir=None, jobs: int = 1) -> dict:
    """Returns {"results": [...], "measured": [...], "metrics": [ScenarioMetrics]}.

    With ``out_dir`` set, also writes results.json (deterministic),
    measured.json (wall-clock), tables.txt, tables.csv and the audit export
    of the Proposed variant's Scenario C log.
    """
    from .report import render_csv, render_text

    scenarios = tuple(s.upper() for s in scenarios)
    for s in scenarios:
        if s not in SCENARIOS:
            raise ValueError(f"unknown scenario {s!r}; expected one of {', '.join(SCENARIOS)}")
    variants = [ArchitectureVariant.parse(v) for v in (variants or list(ArchitectureVariant))]
    cells = _cells(scenarios, variants)
    raw = json.loads(canonical_json(config.raw))

    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_run_cell, [raw] * len(cells), *zip(*cells)))
    else:
        outs = []
        for s, v in cells:
            log.info("running scenario %s / %s", s, v)
            outs.append(_run_cell(raw, s, v))

    metrics = [m for m, _ in outs]
    is_ref = [v in REFERENCE_ROWS for _, v in cells]
    results = {
        "config_hash": config.config_hash,
        "seed": config.seed,
        "cells": [m.deterministic_dict() for m, ref in zip(metrics, is_ref) if not ref],
        "reference_cells": [m.deterministic_dict() for m, ref in zip(metrics, is_ref) if ref],
    }
    measured = {
        "config_hash": config.config_hash,
        "seed": config.seed,
        "cells": [m.measured_dict() for m in metrics],
    }
    bundle = {"results": results, "measured": measured, "metrics": metrics}

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.json").write_text(json.dumps(results, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        (out / "measured.json").write_text(json.dumps(measured, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        (out / "tables.txt").write_text(render_text(results, measured), encoding="utf-8")
        (out / "tables.csv").write_text(render_csv(results), encoding="utf-8")
        for (s, v), (_, records) in zip(cells, outs):
            if s == "C" and v == ArchitectureVariant.PROPOSED.value and records is not None:
                tree = audit.MerkleLog()
                for r in records:
                    tree.append_bytes(r)
                audit.write_export(tree, out / "records.jsonl", out / "audit_manifest.json",
                                   meta={"config_hash": config.config_hash, "seed": config.seed})
    return bundle


def self_check(bundle: dict, config: ScenarioConfig) -> list:
    """(name, passed, detail) for the headline invariants of a finished run."""
    res = bundle["results"]
    cells = {(c["scenario"], c["variant"]): c for c in res["cells"] + res.get("reference_cells", [])}
    measured = {(c["scenario"], c["variant"]): c for c in bundle["measured"]["cells"]}
    checks = []
    P = ArchitectureVariant.PROPOSED.value
    S = ArchitectureVariant.STANDARD_ENCRYPTION.value

    a = cells.get(("A", P))
    if a is not None:
        v = a["plaintext_recovered_pct"]
        checks.append(("A: Proposed plaintext recovered < 5%", v is not None and v < 5.0, f"{v}"))
        checks.append(("A: tampered ciphertext never accepted", a["extra"]["tamper_accepted"] == 0,
                       f"{a['extra']['tamper_accepted']}/{a['extra']['tamper_attempts']}"))
    b, b_nodp, b_ref = cells.get(("B", P)), cells.get(("B", S)), cells.get(("B", "TrainTimeDP"))
    if b and b_nodp and b_ref:
        ok = b["pii_per_1000"] <= 0.4 * b_ref["pii_per_1000"] and b["pii_per_1000"] <= 0.2 * b_nodp["pii_per_1000"]
        checks.append(("B: extraction reduced vs train-time DP and no DP", ok,
                       f"{b['pii_per_1000']:.2f} vs {b_ref['pii_per_1000']:.2f} / {b_nodp['pii_per_1000']:.2f}"))
        checks.append(("B: utility retention >= 0.90", b["utility_retention"] >= 0.90, f"{b['utility_retention']:.3f}"))
    c = cells.get(("C", P))
    if c is not None:
        checks.append(("C: zero violations under strict enforcement", c["cvr"] == 0, f"{c['cvr']}"))
        mttv = measured[("C", P)]["mttv_ms"]
        checks.append(("C: mean time to verify < 50 ms", mttv is not None and mttv < 50, f"{mttv}"))
        ov = (c["overhead"] or {}).get("total")
        checks.append(("C: total overhead within 15-18%", ov is not None and 15 <= ov <= 18, f"{ov}"))
    return checks
