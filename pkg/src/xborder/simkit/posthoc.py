"""Post-hoc compliance re-evaluation by walking the raw rule tables.

Deliberately shares no decision code with ``xborder.policy`` so that it can
audit the enforcement path independently.
"""

from __future__ import annotations

from ..policy import SensitivityClass, Verdict


def _effective_class(registry, packet) -> int:
    uplift = registry.jurisdiction(packet.subject_jurisdiction).regime.class_uplift
    level = int(packet.data_class)
    for _ in range(len(SensitivityClass)):
        target = uplift.get(SensitivityClass(level))
        if target is not None and int(target) > level:
            level = int(target)
    return level


def _pair_denied(registry, rules, src, dst, level) -> bool:
    if src == dst:
        return False
    regime = registry.jurisdiction(src).regime
    if regime.residency_required and level >= int(SensitivityClass.PERSONAL):
        return True
    for rule in rules:
        if rule.source == src and rule.destination == dst and int(rule.data_class) == level:
            return rule.verdict is Verdict.DENY
    return True


def transfer_denied(registry, packet) -> bool:
    rules = registry.rules()
    level = _effective_class(registry, packet)
    sources = {packet.origin, packet.subject_jurisdiction}
    return any(_pair_denied(registry, rules, s, packet.destination, level) for s in sources)


def route_violations(registry, packet, hop_jurisdictions) -> list:
    """Human-readable reasons ``packet`` travelling through ``hop_jurisdictions``
    broke policy; empty when compliant."""
    rules = registry.rules()
    level = _effective_class(registry, packet)
    sources = {packet.origin, packet.subject_jurisdiction}
    reasons = []
    if any(_pair_denied(registry, rules, s, packet.destination, level) for s in sources):
        reasons.append(f"{packet.origin}->{packet.destination} not permitted")
    for code in hop_jurisdictions[1:-1]:
        if code == packet.origin:
            continue
        if any(_pair_denied(registry, rules, s, code, level) for s in sources):
            reasons.append(f"transit through {code} not permitted")
    return reasons
