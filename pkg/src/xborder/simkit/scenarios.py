"""The three experiments, each run per architecture variant.

A: border interception with compelled key disclosure.
B: prompt extraction and membership inference against a canary model.
C: compliance enforcement, audit-proof latency and overhead accounting.
"""

from __future__ import annotations

import dataclasses
import time
from collections import defaultdict

import numpy as np

from .. import audit, crypto, policy, privacy
from ..adversary import (
    Intercept,
    ModelEndpoint,
    border_intercept,
    extraction_attack,
    membership_inference,
    mitm_tamper,
)
from ..errors import ConfigError, NoCompliantRoute
from ..policy import DataPacket, SensitivityClass
from ..routing import plan_route, static_route
from . import posthoc
from .config import ScenarioConfig
from .metrics import OVERHEAD_COMPONENTS, ScenarioMetrics
from .variants import PROFILES, ArchitectureVariant

_STREAM_TRAFFIC_A = 1
_STREAM_B = 2
_STREAM_TRAFFIC_C = 3
_STREAM_TRAFFIC_P = 4
_STREAM_VARIANT = 10


def _rng(config: ScenarioConfig, *stream: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, *stream])


def _variant_index(variant) -> int:
    return list(ArchitectureVariant).index(variant)


def generate_traffic(config: ScenarioConfig, n: int, rng: np.random.Generator) -> list:
    """Uniform (origin region, destination region, class, subject) tuples."""
    regions = sorted(config.graph.regions)
    codes = sorted(config.registry.codes)
    classes = list(SensitivityClass)
    size = config.traffic["payload_bytes"]
    o = rng.integers(len(regions), size=n)
    d = rng.integers(len(regions), size=n)
    c = rng.integers(len(classes), size=n)
    s = rng.integers(len(codes), size=n)
    blob = rng.bytes(n * size)
    packets = []
    for i in range(n):
        src, dst = regions[o[i]], regions[d[i]]
        packets.append(
            DataPacket(
                id=f"t{i:06d}",
                origin=config.graph.jurisdiction_of(src),
                destination=config.graph.jurisdiction_of(dst),
                subject_jurisdiction=codes[s[i]],
                data_class=classes[c[i]],
                payload=blob[i * size:(i + 1) * size],
                origin_region=src,
                destination_region=dst,
            )
        )
    return packets


def misclassify(packet: DataPacket) -> DataPacket:
    """The classifier's failure mode: data read as public and already at home
    in the destination jurisdiction."""
    return dataclasses.replace(
        packet, data_class=SensitivityClass.PUBLIC, subject_jurisdiction=packet.destination
    )


# ---------------------------------------------------------------- scenario A


def run_scenario_a(config: ScenarioConfig, variant) -> ScenarioMetrics:
    variant = ArchitectureVariant.parse(variant)
    profile = PROFILES[variant]
    att = config.attack
    graph, registry = config.graph, config.registry
    packets = generate_traffic(config, config.traffic["scenario_a_transfers"], _rng(config, _STREAM_TRAFFIC_A))
    rng = _rng(config, _STREAM_TRAFFIC_A, _STREAM_VARIANT + _variant_index(variant))
    escrow = crypto.EscrowRegistry.for_registry(registry)

    cross_requests = transmitted = blocked = misclassified = 0
    captured = defaultdict(list)
    tamper_pool = []
    for pkt in packets:
        cross = pkt.origin != pkt.destination
        cross_requests += cross
        if profile.localization and cross and pkt.data_class >= SensitivityClass.PERSONAL:
            if rng.random() < att["localization_coverage"]:
                blocked += 1
                continue

        if profile.key_layout == "escrowed":
            wrong = rng.random() < att["misclassification_rate"]
            misclassified += wrong
            view = misclassify(pkt) if wrong else pkt
            if not policy.evaluate_transfer(view, registry).allowed:
                blocked += 1
                continue
            try:
                route = plan_route(view, graph, registry)
            except NoCompliantRoute:
                blocked += 1
                continue
            home = view.subject_jurisdiction if wrong else pkt.origin
            pkey = crypto.generate_key(home, crypto.KeyPurpose.PAYLOAD, escrow)
            message = pkt.payload
        else:
            route = static_route(graph, pkt.origin_region, pkt.destination_region)
            pkey = crypto.generate_key(pkt.origin, crypto.KeyPurpose.PAYLOAD, escrow)
            crypto.replicate_key(pkey, escrow, [c for c in registry.codes if c != pkt.origin])
            message = pkt.payload
            if profile.federated_updates and rng.random() >= att["fl_leak_probability"]:
                # the update carries gradients that do not reconstruct the record
                message = bytes(b ^ 0xFF for b in pkt.payload)

        transmitted += 1
        ct = crypto.encrypt_payload(DataPacket(pkt.id, pkt.origin, pkt.destination,
                                               pkt.subject_jurisdiction, pkt.data_class, message), pkey)
        for u, v in graph.crossings(route):
            entered = graph.jurisdiction_of(v)
            tkey = None
            if profile.transit_layers:
                tkey = crypto.generate_key(entered, crypto.KeyPurpose.TRANSIT, escrow)
                ct = crypto.add_transit_layer(ct, tkey)
            if entered != pkt.origin and rng.random() < att["interception_rate"]:
                captured[entered].append(Intercept(pkt.id, ct, pkt.payload))
                if len(tamper_pool) < att["mitm_samples"]:
                    tamper_pool.append((ct, [k for k in (pkey, tkey) if k], message, (u, v)))
            if tkey is not None:
                ct = crypto.strip_transit_layer(ct, tkey)
        if crypto.decrypt_payload(ct, pkey) != message:
            raise AssertionError(f"delivery of {pkt.id} corrupted")

    reports = [border_intercept(captured[j], j, escrow) for j in sorted(captured)]
    attempts = sum(r.attempts for r in reports)
    recovered = {pid for r in reports for pid, ok in r.detail if ok}
    tamper_rng = _rng(config, _STREAM_TRAFFIC_A, 99, _variant_index(variant))
    tampers = [mitm_tamper(ct, keys, orig, tamper_rng, 1, edge) for ct, keys, orig, edge in tamper_pool]
    return ScenarioMetrics(
        scenario="A",
        variant=variant.value,
        asr=(sum(r.successes for r in reports) / attempts) if attempts else None,
        plaintext_recovered_pct=(100.0 * len(recovered) / cross_requests) if cross_requests else None,
        extra={
            "transfers": len(packets),
            "cross_border_requests": cross_requests,
            "transmitted": transmitted,
            "blocked": blocked,
            "misclassified": misclassified,
            "intercepted": attempts,
            "recovered": len(recovered),
            "per_jurisdiction": {r.extras["jurisdiction"]: r.to_dict() for r in reports},
            "tamper_attempts": len(tampers),
            "tamper_accepted": sum(t.successes for t in tampers),
        },
    )


# ---------------------------------------------------------------- scenario B

TABLE_II_ROWS = ("NoDP", "FederatedLearning", "TrainTimeDP", "LocalizationDP", "Proposed")


def privacy_row_for(variant) -> str:
    try:
        return PROFILES[ArchitectureVariant.parse(variant)].privacy_row
    except ValueError:
        return str(variant)


def run_scenario_b(config: ScenarioConfig, variant) -> ScenarioMetrics:
    """``variant`` is an ArchitectureVariant or a bare Table II row name."""
    row_name = privacy_row_for(variant)
    try:
        label = ArchitectureVariant.parse(variant).value
    except ValueError:
        label = str(variant)
    pcfg = config.privacy
    rows = pcfg.get("rows", {})
    if row_name not in rows:
        raise ConfigError(f"privacy.rows has no entry for {row_name!r}")
    row = rows[row_name]
    mode = privacy.DPMode(row["mode"])
    corpus = privacy.synthetic_corpus(
        pcfg["n_canaries"], pcfg["n_background"], pcfg["n_decoys"], seed=config.seed
    )
    targets = list(corpus.canaries)
    eval_prompts = list(corpus.background)
    strength = pcfg["base_memorization"] * row["damping"]
    juris = list(pcfg["attacker_jurisdictions"]) if mode is privacy.DPMode.INFERENCE_DP else [None]
    row_idx = TABLE_II_ROWS.index(row_name) if row_name in TABLE_II_ROWS else len(TABLE_II_ROWS)

    per_1000, per_j, utilities, advantages = [], defaultdict(list), [], []
    for t in range(pcfg["trials"]):
        rng = _rng(config, _STREAM_B, row_idx, t)
        model = privacy.build_model(
            corpus,
            strength,
            seed=rng,
            background_degradation=row["background_degradation"],
            false_flag_rate=pcfg["false_flag_rate"] if mode is privacy.DPMode.INFERENCE_DP else 0.0,
        )
        trial_rates = []
        for code in juris:
            eps = privacy.jurisdiction_epsilon(code, config.registry) if code else None
            budget = privacy.PrivacyBudget(code, pcfg["account_epsilon_total"]) if code else None
            endpoint = ModelEndpoint(model, mode, budget, eps, rng)
            rep = extraction_attack(endpoint, targets, pcfg["query_budget"], rng)
            trial_rates.append(rep.extras["per_1000"])
            per_j[code or "-"].append(rep.extras["per_1000"])
        per_1000.append(float(np.mean(trial_rates)))

        if t < pcfg["eval_trials"]:
            for code in juris:
                eps = privacy.jurisdiction_epsilon(code, config.registry) if code else None
                if eval_prompts:
                    utilities.append(privacy.utility_retention(model, mode, eval_prompts, rng, eps))
                candidates = len(targets) + len(corpus.decoys)
                budget = privacy.PrivacyBudget(code, eps * max(candidates, 1)) if code else None
                mi = membership_inference(ModelEndpoint(model, mode, budget, eps, rng), targets, corpus.decoys, rng)
                advantages.append(mi.extras["advantage"])

    return ScenarioMetrics(
        scenario="B",
        variant=label,
        pii_per_1000=float(np.mean(per_1000)) if per_1000 else None,
        utility_retention=float(np.mean(utilities)) if utilities else None,
        asr=None,
        extra={
            "privacy_row": row_name,
            "dp_mode": mode.value,
            "memorization_strength": strength,
            "trials": pcfg["trials"],
            "pii_per_1000_sd": float(np.std(per_1000)) if per_1000 else None,
            "pii_per_1000_by_jurisdiction": {k: float(np.mean(v)) for k, v in sorted(per_j.items())},
            "mi_advantage": float(np.mean(advantages)) if advantages else None,
        },
    )


# ---------------------------------------------------------------- scenario C


def _enforce(config, profile, packets, rng, misclass_rate, measure=False):
    """Run transfers through a variant's pipeline.

    Returns (log, executed, stats, overhead_units, timings) where executed is
    a list of (packet, route hop jurisdictions).
    """
    registry, graph = config.registry, config.graph
    escrow = crypto.EscrowRegistry.for_registry(registry)
    log = audit.MerkleLog()
    executed = []
    noncompliant = prevented = 0
    cost = defaultdict(float)
    base_total = 0.0
    timings = defaultdict(float)
    mult = config.cost_model["multipliers"]
    base_ms = config.cost_model["base_processing_ms"]
    clock = time.perf_counter

    for tick, pkt in enumerate(packets):
        truly_denied = posthoc.transfer_denied(registry, pkt)
        noncompliant += truly_denied

        t0 = clock()
        static = static_route(graph, pkt.origin_region, pkt.destination_region)
        timings["baseline"] += clock() - t0

        route = static
        controls = ()
        verdict = "unchecked"
        if profile.localization and pkt.origin != pkt.destination and pkt.data_class >= SensitivityClass.PERSONAL:
            if rng.random() < config.attack["localization_coverage"]:
                prevented += truly_denied
                continue
        if profile.pre_transfer_check:
            view = misclassify(pkt) if rng.random() < misclass_rate else pkt
            t0 = clock()
            decision = policy.evaluate_transfer(view, registry)
            route = None
            if decision.allowed:
                try:
                    route = plan_route(view, graph, registry)
                except NoCompliantRoute:
                    route = None
            timings["routing"] += clock() - t0
            verdict = decision.verdict.value if route is not None else "deny"
            if route is not None:
                controls = tuple(sorted(policy.required_controls(
                    decision, registry.regime_of(pkt.origin), policy.classify_packet(view, registry))))
            audit.append_record(log, audit.AuditRecord(
                pkt.id, pkt.origin, pkt.destination, verdict, controls, tick))
            if route is None:
                prevented += truly_denied
                continue

        hop_codes = [graph.jurisdiction_of(h) for h in route.hops]
        reasons = posthoc.route_violations(registry, pkt, hop_codes)
        executed.append((pkt, route, reasons))
        if profile.audit == "post":
            audit.append_record(log, audit.AuditRecord(
                pkt.id, pkt.origin, pkt.destination, "violation" if reasons else "compliant", (), tick))

        crossings = graph.crossings(route)
        layers = 1 + (len(crossings) if profile.transit_layers else 0)
        base = static.total_cost + base_ms
        base_total += base
        if profile.policy_routing:
            cost["routing"] += mult["routing_per_plan"] * base + (route.total_cost - static.total_cost)
        cost["encryption"] += mult["encryption_per_layer"] * base * layers
        cost["escrow"] += mult["escrow_per_key"] * base * (layers if profile.key_layout == "escrowed" else 1)
        if profile.privacy_row == "Proposed":
            cost["dp"] += mult["dp_per_transfer"] * base
        if profile.audit == "pre":
            cost["proof"] += mult["proof_per_assertion"] * base

        if measure:
            t0 = clock()
            home = pkt.origin
            pkey = crypto.generate_key(home, crypto.KeyPurpose.PAYLOAD, escrow)
            tkeys = [crypto.generate_key(graph.jurisdiction_of(v), crypto.KeyPurpose.TRANSIT, escrow)
                     for _, v in crossings] if profile.transit_layers else []
            timings["escrow"] += clock() - t0
            t0 = clock()
            ct = crypto.encrypt_payload(pkt, pkey)
            for k in tkeys:
                ct = crypto.add_transit_layer(ct, k)
                ct = crypto.strip_transit_layer(ct, k)
            crypto.decrypt_payload(ct, pkey)
            timings["encryption"] += clock() - t0
            if profile.privacy_row == "Proposed":
                t0 = clock()
                eps = privacy.jurisdiction_epsilon(pkt.subject_jurisdiction, registry)
                privacy.laplace_noise(1.0, eps, rng)
                timings["dp"] += clock() - t0

    stats = {"requests": len(packets), "noncompliant": noncompliant, "prevented": prevented}
    if base_total > 0:
        overhead = {c: 100.0 * cost[c] / base_total for c in OVERHEAD_COMPONENTS}
        overhead["total"] = sum(overhead[c] for c in OVERHEAD_COMPONENTS)
    else:
        overhead = None
    return log, executed, stats, overhead, timings


def measure_mttv(log: audit.MerkleLog) -> tuple:
    """Mean wall-clock ms to produce and verify one inclusion assertion."""
    if not len(log):
        return None, True
    root = log.root
    durations = []
    all_ok = True
    for i in range(len(log)):
        t0 = time.perf_counter()
        assertion = audit.prove_inclusion(log, i)
        ok = audit.verify_assertion(assertion, root, len(log))
        durations.append(time.perf_counter() - t0)
        all_ok &= ok
    return 1000.0 * float(np.mean(durations)), all_ok


def run_scenario_c(config: ScenarioConfig, variant, keep_log: bool = False) -> ScenarioMetrics:
    variant = ArchitectureVariant.parse(variant)
    profile = PROFILES[variant]
    vi = _variant_index(variant)
    packets = generate_traffic(config, config.traffic["scenario_c_transfers"], _rng(config, _STREAM_TRAFFIC_C))
    log, executed, stats, overhead, timings = _enforce(
        config, profile, packets, _rng(config, _STREAM_TRAFFIC_C, _STREAM_VARIANT + vi), 0.0, measure=True
    )
    violations = sum(1 for _, _, reasons in executed if reasons)
    mttv, proofs_ok = measure_mttv(log)

    prob_packets = generate_traffic(
        config, config.traffic["probabilistic_transfers"], _rng(config, _STREAM_TRAFFIC_P)
    )
    _, p_exec, p_stats, _, _ = _enforce(
        config, profile, prob_packets, _rng(config, _STREAM_TRAFFIC_P, _STREAM_VARIANT + vi),
        config.attack["misclassification_rate"],
    )
    p_viol = sum(1 for _, _, reasons in p_exec if reasons)

    def rate(num, den):
        return num / den if den else None

    base_time = timings.get("baseline", 0.0)
    measured = {
        "component_seconds": {k: v for k, v in sorted(timings.items())},
        "measured_overhead_ratio": (
            {k: v / base_time for k, v in sorted(timings.items()) if k != "baseline"} if base_time else None
        ),
        "proofs_verified": proofs_ok,
    }
    metrics = ScenarioMetrics(
        scenario="C",
        variant=variant.value,
        cvr=rate(violations, len(executed)),
        overhead=overhead,
        mttv_ms=mttv,
        measured=measured,
        extra={
            "mode": "strict",
            "transfers": stats["requests"],
            "executed": len(executed),
            "violations": violations,
            "noncompliant_requests": stats["noncompliant"],
            "prevention_rate": rate(stats["prevented"], stats["noncompliant"]),
            "audit_records": len(log),
            "audit_root": log.root.hex(),
            "probabilistic": {
                "transfers": p_stats["requests"],
                "misclassification_rate": config.attack["misclassification_rate"],
                "executed": len(p_exec),
                "violations": p_viol,
                "cvr": rate(p_viol, len(p_exec)),
                "noncompliant_requests": p_stats["noncompliant"],
                "prevention_rate": rate(p_stats["prevented"], p_stats["noncompliant"]),
            },
        },
    )
    if keep_log:
        metrics.measured["_log"] = log
    return metrics
