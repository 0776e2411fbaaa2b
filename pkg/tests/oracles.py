"""Independent reference implementations used only by the tests.

None of these import the code under test's decision logic; they work
from raw documents, brute force or textbook definitions.
"""

from __future__ import annotations

import hashlib
import math

import networkx as nx

CLASSES = ("Public", "Personal", "SensitivePersonal", "Confidential")


# ------------------------------------------------------------------ policy

def _regime(doc, code):
    rid = next(j["regime"] for j in doc["jurisdictions"] if j["code"] == code)
    return next(r for r in doc["regimes"] if r["id"] == rid)


def effective_class(doc, subject, declared: str) -> int:
    level = CLASSES.index(declared)
    uplift = _regime(doc, subject).get("class_uplift") or {}
    changed = True
    while changed:
        changed = False
        target = uplift.get(CLASSES[level])
        if target is not None and CLASSES.index(target) > level:
            level = CLASSES.index(target)
            changed = True
    return level


def pair_verdict(doc, src, dst, level: int) -> str:
    if src == dst:
        return "allow"
    regime = _regime(doc, src)
    if regime.get("residency_required") and level >= 1:
        return "deny"
    for rule in regime.get("rules", ()):
        if rule["source"] == src and rule["destination"] == dst and CLASSES.index(rule["class"]) == level:
            return rule["verdict"]
    return "deny"


_RANK = {"allow": 0, "allow_with_controls": 1, "deny": 2}


def flow_verdict(doc, origin, subject, dst, declared: str) -> str:
    level = effective_class(doc, subject, declared)
    verdicts = [pair_verdict(doc, s, dst, level) for s in {origin, subject}]
    return max(verdicts, key=_RANK.__getitem__)


# ----------------------------------------------------------------- routing

def brute_force_route(regions: dict, edges: list, source, target, permitted_codes):
    """Minimum (cost, hop count, hops) over all simple paths whose
    intermediate regions lie in permitted jurisdictions; None if none."""
    if source == target:
        return (0, 1, (source,))
    g = nx.Graph()
    g.add_nodes_from(regions)
    for a, b, w in edges:
        g.add_edge(a, b, w=w)
    best = None
    for path in nx.all_simple_paths(g, source, target):
        if any(regions[h] not in permitted_codes for h in path[1:-1]):
            continue
        cost = sum(g[u][v]["w"] for u, v in zip(path, path[1:]))
        key = (cost, len(path), tuple(path))
        if best is None or key < best:
            best = key
    return best


# ------------------------------------------------------------------ merkle

def rfc_root(leaf_data: list) -> bytes:
    """Recursive split at the largest power of two below n."""
    def h(data):
        return hashlib.sha256(data).digest()

    def mth(items):
        n = len(items)
        if n == 1:
            return h(b"\x00" + items[0])
        k = 1 << (n - 1).bit_length() - 1
        return h(b"\x01" + mth(items[:k]) + mth(items[k:]))

    if not leaf_data:
        return h(b"")
    return mth(list(leaf_data))


# --------------------------------------------------------------------- dp

def rr_truth_probability(epsilon: float) -> float:
    return math.exp(epsilon) / (1.0 + math.exp(epsilon))
