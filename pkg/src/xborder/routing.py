"""Policy-filtered shortest paths over a multi-region graph."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import ConfigError, DeniedTransfer, NoCompliantRoute
from .policy import DataPacket, RegimeRegistry, evaluate_flow, evaluate_transfer


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    latency_cost: float
    border_crossing: bool


@dataclass(frozen=True)
class Route:
    hops: tuple
    total_cost: float

    @property
    def border_segments(self) -> list:
        return list(zip(self.hops, self.hops[1:]))


class RegionGraph:
    """Undirected region graph; regions are tagged with a jurisdiction code."""

    def __init__(self, regions: Mapping[str, str], edges: Iterable):
        self.regions = dict(regions)
        self._edges = {}
        self._adj = {r: {} for r in self.regions}
        for item in edges:
            if isinstance(item, Edge):
                a, b, cost, border = item.a, item.b, item.latency_cost, item.border_crossing
            else:
                a, b, cost = item[0], item[1], item[2]
                border = item[3] if len(item) > 3 else None
            for r in (a, b):
                if r not in self.regions:
                    raise ConfigError(f"edge {a}-{b} references unknown region {r!r}")
            if a == b:
                raise ConfigError(f"self-loop on region {a!r}")
            cost = float(cost)
            if cost < 0:
                raise ConfigError(f"edge {a}-{b} has negative cost")
            crossing = self.regions[a] != self.regions[b]
            if border is not None and bool(border) != crossing:
                raise ConfigError(f"edge {a}-{b}: border_crossing flag disagrees with jurisdictions")
            key = frozenset((a, b))
            if key in self._edges:
                raise ConfigError(f"duplicate edge {a}-{b}")
            edge = Edge(a, b, cost, crossing)
            self._edges[key] = edge
            self._adj[a][b] = edge
            self._adj[b][a] = edge

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RegionGraph":
        try:
            regions = {str(n["id"]): str(n["jurisdiction"]) for n in doc["nodes"]}
            edges = [
                (str(e["a"]), str(e["b"]), float(e["latency_ms"]), e.get("border_crossing"))
                for e in doc["edges"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed region graph: {exc!r}") from exc
        return cls(regions, edges)

    @property
    def edges(self) -> list:
        return sorted(self._edges.values(), key=lambda e: (min(e.a, e.b), max(e.a, e.b)))

    def jurisdiction_of(self, region: str) -> str:
        try:
            return self.regions[region]
        except KeyError:
            raise ConfigError(f"unknown region {region!r}") from None

    def edge(self, a: str, b: str):
        return self._edges.get(frozenset((a, b)))

    def neighbors(self, region: str) -> dict:
        return self._adj[region]

    def crossings(self, route: Route) -> list:
        """Border segments of ``route`` as (from_region, to_region) pairs."""
        return [(u, v) for u, v in route.border_segments if self.regions[u] != self.regions[v]]

    def validate_against(self, registry: RegimeRegistry) -> None:
        for region, code in self.regions.items():
            if code not in registry:
                raise ConfigError(f"region {region!r} uses unknown jurisdiction {code!r}")


def shortest_path(
    graph: RegionGraph,
    source: str,
    target: str,
    permitted: Callable[[str], bool] | None = None,
) -> Route:
    """Dijkstra keyed on (cost, hop count, hop list).

    The key is isotone under path extension, so settling each region once
    yields the lexicographically smallest optimal path.  Regions failing
    ``permitted`` are never used as intermediate hops.
    """
    graph.jurisdiction_of(source)
    graph.jurisdiction_of(target)
    if source == target:
        return Route((source,), 0.0)
    heap = [(0.0, 1, (source,))]
    settled = set()
    while heap:
        cost, nhops, hops = heapq.heappop(heap)
        node = hops[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == target:
            return Route(hops, cost)
        for nxt, edge in graph.neighbors(node).items():
            if nxt in settled:
                continue
            if nxt != target and permitted is not None and not permitted(nxt):
                continue
            heapq.heappush(heap, (cost + edge.latency_cost, nhops + 1, hops + (nxt,)))
    raise NoCompliantRoute(f"no permitted path from {source} to {target}")


def _endpoints(packet, graph, source, target):
    source = source or packet.origin_region
    target = target or packet.destination_region
    if source is None or target is None:
        raise ConfigError(f"packet {packet.id}: origin/destination region not given")
    if graph.jurisdiction_of(source) != packet.origin:
        raise ConfigError(f"region {source} is not in origin jurisdiction {packet.origin}")
    if graph.jurisdiction_of(target) != packet.destination:
        raise ConfigError(f"region {target} is not in destination jurisdiction {packet.destination}")
    return source, target


def hop_permission(packet: DataPacket, graph: RegionGraph, registry: RegimeRegistry):
    """Predicate: may ``packet`` pass through a region?  Judged origin->hop."""
    cache = {}

    def permitted(region: str) -> bool:
        code = graph.jurisdiction_of(region)
        if code not in cache:
            cache[code] = code == packet.origin or evaluate_flow(packet, code, registry).allowed
        return cache[code]

    return permitted


def plan_route(
    packet: DataPacket,
    graph: RegionGraph,
    registry: RegimeRegistry,
    source: str | None = None,
    target: str | None = None,
) -> Route:
    decision = evaluate_transfer(packet, registry)
    if not decision.allowed:
        raise DeniedTransfer(f"packet {packet.id}: {decision.rationale}")
    source, target = _endpoints(packet, graph, source, target)
    return shortest_path(graph, source, target, hop_permission(packet, graph, registry))


def static_route(graph: RegionGraph, source: str, target: str) -> Route:
    """Latency-only shortest path with no policy filtering (baseline routing)."""
    return shortest_path(graph, source, target)


def validate_route(
    route: Route, packet: DataPacket, graph: RegionGraph, registry: RegimeRegistry
) -> bool:
    hops = tuple(route.hops)
    if not hops or len(set(hops)) != len(hops):
        return False
    if any(h not in graph.regions for h in hops):
        return False
    try:
        if not evaluate_transfer(packet, registry).allowed:
            return False
        source, target = _endpoints(
            packet, graph, packet.origin_region or hops[0], packet.destination_region or hops[-1]
        )
    except Exception:
        return False
    if hops[0] != source or hops[-1] != target:
        return False
    total = 0.0
    for u, v in zip(hops, hops[1:]):
        edge = graph.edge(u, v)
        if edge is None:
            return False
        total += edge.latency_cost
    if abs(total - route.total_cost) > 1e-9 * max(1.0, abs(total)):
        return False
    permitted = hop_permission(packet, graph, registry)
    return all(permitted(h) for h in hops[1:-1])
