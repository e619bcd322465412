"""Corridor graph, exact shortest paths and k loopless candidate routes.

All path searches minimise the scalarised cost
``w_d * total_distance_m + w_t * total_time_s``. Ties between equal-cost
paths go to the lexicographically smallest node sequence, so every query is
deterministic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import geojson
from .errors import NoPathError, ParseError, ValidationError
from .geo import GeoPoint, Polyline, haversine_distance

SNAP_TOLERANCE_M = 1.0
ROUTE_TOTAL_RTOL = 1e-6


@dataclass(frozen=True)
class Edge:
    index: int
    source: int
    target: int
    length_m: float
    travel_time_s: float
    geometry: Polyline

    def __post_init__(self) -> None:
        for name in ("length_m", "travel_time_s"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ValidationError(f"edge {self.source}->{self.target}: {name} must be finite and > 0, got {v!r}")
        if self.source == self.target:
            raise ValidationError(f"edge {self.source}->{self.target} is a self-loop")

    def cost(self, w_d: float, w_t: float) -> float:
        return w_d * self.length_m + w_t * self.travel_time_s


def check_weights(w_d: float, w_t: float) -> None:
    for name, w in (("w_d", w_d), ("w_t", w_t)):
        if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w) or w < 0:
            raise ValidationError(f"{name} must be a finite number >= 0, got {w!r}")
    if w_d == 0 and w_t == 0:
        raise ValidationError("w_d and w_t must not both be zero")


@dataclass(frozen=True)
class Route:
    """Loopless node/edge sequence with aggregate distance and time."""

    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    total_distance_m: float = field(default=math.nan)
    total_time_s: float = field(default=math.nan)

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        edges = tuple(self.edges)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        if len(edges) < 1 or len(nodes) != len(edges) + 1:
            raise ValidationError("route needs at least one edge and len(nodes) == len(edges) + 1")
        for i, e in enumerate(edges):
            if e.source != nodes[i] or e.target != nodes[i + 1]:
                raise ValidationError(f"route edge {i} ({e.source}->{e.target}) does not join nodes {nodes[i]}->{nodes[i + 1]}")
        if len(set(nodes)) != len(nodes):
            raise ValidationError("route revisits a node")
        dist = sum(e.length_m for e in edges)
        time = sum(e.travel_time_s for e in edges)
        if math.isnan(self.total_distance_m):
            object.__setattr__(self, "total_distance_m", dist)
        elif not math.isclose(self.total_distance_m, dist, rel_tol=ROUTE_TOTAL_RTOL):
            raise ValidationError(f"route total_distance_m {self.total_distance_m} != edge sum {dist}")
        if math.isnan(self.total_time_s):
            object.__setattr__(self, "total_time_s", time)
        elif not math.isclose(self.total_time_s, time, rel_tol=ROUTE_TOTAL_RTOL):
            raise ValidationError(f"route total_time_s {self.total_time_s} != edge sum {time}")

    @property
    def origin(self) -> int:
        return self.nodes[0]

    @property
    def destination(self) -> int:
        return self.nodes[-1]

    def cost(self, w_d: float, w_t: float) -> float:
        return w_d * self.total_distance_m + w_t * self.total_time_s

    def polyline(self) -> Polyline:
        pts: list[GeoPoint] = []
        for e in self.edges:
            for p in e.geometry.points:
                if not pts or pts[-1] != p:
                    pts.append(p)
        return Polyline(tuple(pts))


class NetworkGraph:
    """Immutable simple directed graph over snapped node coordinates."""

    def __init__(self, nodes: Sequence[GeoPoint], edges: Sequence[Edge]):
        self.nodes: tuple[GeoPoint, ...] = tuple(nodes)
        self.edges: tuple[Edge, ...] = tuple(edges)
        n = len(self.nodes)
        if n == 0 or not self.edges:
            raise ValidationError("network is empty")
        out: list[list[Edge]] = [[] for _ in range(n)]
        seen: dict[tuple[int, int], int] = {}
        for i, e in enumerate(self.edges):
            if e.index != i:
                raise ValidationError(f"edge at position {i} carries index {e.index}")
            if not (0 <= e.source < n and 0 <= e.target < n):
                raise ValidationError(f"edge {i} references an unknown node")
            if (e.source, e.target) in seen:
                raise ValidationError(f"duplicate directed edge {e.source}->{e.target}")
            seen[(e.source, e.target)] = i
            out[e.source].append(e)
        self._out = tuple(tuple(sorted(lst, key=lambda e: e.target)) for lst in out)
        self._pair = seen
        self.components: tuple[int, ...] = _weak_components(n, self.edges)

    def __repr__(self) -> str:
        return f"NetworkGraph(nodes={len(self.nodes)}, edges={len(self.edges)})"

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def out_edges(self, node: int) -> tuple[Edge, ...]:
        """Outgoing edges sorted by target id."""
        return self._out[node]

    def edge_between(self, u: int, v: int) -> Edge | None:
        i = self._pair.get((u, v))
        return None if i is None else self.edges[i]

    def route_from_nodes(self, nodes: Sequence[int]) -> Route:
        edges = []
        for u, v in zip(nodes, nodes[1:]):
            e = self.edge_between(u, v)
            if e is None:
                raise ValidationError(f"no edge {u}->{v}")
            edges.append(e)
        return Route(tuple(nodes), tuple(edges))

    def check_node(self, node: int) -> None:
        if isinstance(node, bool) or not isinstance(node, int) or not 0 <= node < len(self.nodes):
            raise ValidationError(f"node id {node!r} not in graph (0..{len(self.nodes) - 1})")

    def nearest_node(self, p: GeoPoint) -> tuple[int, float]:
        """Closest node by haversine distance; ties go to the smaller id."""
        best, best_d = -1, math.inf
        for i, q in enumerate(self.nodes):
            d = haversine_distance(p, q)
            if d < best_d:
                best, best_d = i, d
        return best, best_d

    @classmethod
    def from_edge_list(cls, nodes: Sequence[GeoPoint],
                       edges: Iterable[tuple[int, int, float, float]]) -> "NetworkGraph":
        """Build from ``(source, target, length_m, travel_time_s)`` tuples with straight geometry."""
        built = []
        for i, (u, v, length, time) in enumerate(edges):
            built.append(Edge(i, u, v, length, time, Polyline((nodes[u], nodes[v]))))
        return cls(nodes, built)


def _weak_components(n: int, edges: Iterable[Edge]) -> tuple[int, ...]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        a, b = find(e.source), find(e.target)
        if a != b:
            parent[max(a, b)] = min(a, b)
    labels: dict[int, int] = {}
    out = []
    for i in range(n):
        out.append(labels.setdefault(find(i), len(labels)))
    return tuple(out)


# --- loading -------------------------------------------------------------------

@dataclass
class _RawSegment:
    feature_index: int
    points: list[GeoPoint]
    length_m: float
    travel_time_s: float
    oneway: bool


def parse_network_features(features: list, source: str) -> tuple[list[_RawSegment], list[geojson.Diagnostic]]:
    """Validate each line feature; bad ones become diagnostics."""
    segments: list[_RawSegment] = []
    diags: list[geojson.Diagnostic] = []
    for i, feat in enumerate(features):
        try:
            pts = geojson.parse_linestring(feat)
            props = geojson.feature_properties(feat)
        except ParseError as exc:
            diags.append(geojson.Diagnostic(source, i, "geometry", str(exc), "parse"))
            continue
        try:
            length = geojson.number_property(props, "length_m", positive=True)
            time = geojson.number_property(props, "travel_time_s", positive=True)
            oneway = props.get("oneway", False)
            if not isinstance(oneway, bool):
                raise ValidationError(f"property 'oneway' must be boolean, got {oneway!r}")
        except ValidationError as exc:
            diags.append(geojson.Diagnostic(source, i, "attributes", str(exc)))
            continue
        segments.append(_RawSegment(i, pts, length, time, oneway))
    return segments, diags


class _Snapper:
    """Deduplicates coordinates within SNAP_TOLERANCE_M."""

    _CELL = 1e-5  # degrees

    def __init__(self) -> None:
        self.points: list[GeoPoint] = []
        self._grid: dict[tuple[int, int], list[int]] = {}

    def _key(self, p: GeoPoint) -> tuple[int, int]:
        return math.floor(p.lat / self._CELL), math.floor(p.lon / self._CELL)

    def snap(self, p: GeoPoint) -> int:
        ki, kj = self._key(p)
        coslat = max(math.cos(math.radians(p.lat)), 1e-6)
        span_lon = int(math.ceil(SNAP_TOLERANCE_M / (111_000.0 * coslat) / self._CELL)) + 1
        best, best_d = -1, math.inf
        for di in (-1, 0, 1):
            for dj in range(-span_lon, span_lon + 1):
                for idx in self._grid.get((ki + di, kj + dj), ()):
                    d = haversine_distance(p, self.points[idx])
                    if d <= SNAP_TOLERANCE_M and (d < best_d or (d == best_d and idx < best)):
                        best, best_d = idx, d
        if best >= 0:
            return best
        idx = len(self.points)
        self.points.append(p)
        self._grid.setdefault((ki, kj), []).append(idx)
        return idx


def build_network(segments: Iterable[_RawSegment], source: str = "<memory>",
                  merge_weights: tuple[float, float] = (1.0, 1.0),
                  ) -> tuple[NetworkGraph, list[geojson.Diagnostic]]:
    """Snap endpoints, expand two-way segments and merge parallel edges."""
    snapper = _Snapper()
    w_d, w_t = merge_weights
    specs: list[list] = []  # [u, v, length, time, points]
    slot: dict[tuple[int, int], int] = {}
    diags: list[geojson.Diagnostic] = []

    def add(u, v, length, time, pts):
        pos = slot.get((u, v))
        if pos is None:
            slot[(u, v)] = len(specs)
            specs.append([u, v, length, time, pts])
        elif w_d * length + w_t * time < w_d * specs[pos][2] + w_t * specs[pos][3]:
            specs[pos] = [u, v, length, time, pts]

    for seg in segments:
        u = snapper.snap(seg.points[0])
        v = snapper.snap(seg.points[-1])
        if u == v:
            diags.append(geojson.Diagnostic(source, seg.feature_index, "self-loop",
                                            "line endpoints snap to the same node"))
            continue
        add(u, v, seg.length_m, seg.travel_time_s, seg.points)
        if not seg.oneway:
            add(v, u, seg.length_m, seg.travel_time_s, list(reversed(seg.points)))

    edges = [Edge(i, u, v, length, time, Polyline(tuple(pts)))
             for i, (u, v, length, time, pts) in enumerate(specs)]
    return NetworkGraph(snapper.points, edges), diags


def load_network(source: str | Path, merge_weights: tuple[float, float] = (1.0, 1.0)) -> NetworkGraph:
    """Strictly load a network feature file; the first bad feature raises."""
    source = str(source)
    features = geojson.read_feature_collection(source)
    segments, diags = parse_network_features(features, source)
    if diags:
        diags[0].raise_()
    if not segments:
        raise ValidationError(f"{source}: network is empty")
    graph, diags = build_network(segments, source, merge_weights)
    if diags:
        diags[0].raise_()
    return graph


def network_to_feature_collection(graph: NetworkGraph) -> dict:
    """One one-way line feature per directed edge, in edge order."""
    return geojson.feature_collection([
        geojson.line_feature(e.geometry.points, {
            "length_m": e.length_m,
            "travel_time_s": e.travel_time_s,
            "oneway": True,
        })
        for e in graph.edges
    ])


# --- search --------------------------------------------------------------------

def _best_path(graph: NetworkGraph, origin: int, dest: int, w_d: float, w_t: float,
               banned_nodes: frozenset[int] = frozenset(),
               banned_edges: frozenset[int] = frozenset()) -> tuple[float, tuple[int, ...]] | None:
    """Label-setting search keyed on (cost, node sequence)."""
    # heap entries: (cost, path, dist, time)
    heap: list[tuple[float, tuple[int, ...], float, float]] = [(0.0, (origin,), 0.0, 0.0)]
    settled: set[int] = set()
    while heap:
        cost, path, dist, time = heapq.heappop(heap)
        u = path[-1]
        if u in settled:
            continue
        settled.add(u)
        if u == dest:
            return cost, path
        for e in graph.out_edges(u):
            v = e.target
            if v in settled or v in banned_nodes or e.index in banned_edges:
                continue
            nd = dist + e.length_m
            nt = time + e.travel_time_s
            heapq.heappush(heap, (w_d * nd + w_t * nt, path + (v,), nd, nt))
    return None


def _check_query(graph: NetworkGraph, origin: int, dest: int, w_d: float, w_t: float) -> None:
    graph.check_node(origin)
    graph.check_node(dest)
    if origin == dest:
        raise ValidationError("origin and destination must differ")
    check_weights(w_d, w_t)


def _no_path(graph: NetworkGraph, origin: int, dest: int) -> NoPathError:
    comp = graph.components[origin]
    return NoPathError(
        f"no path from node {origin} to node {dest} (origin component {comp}, "
        f"destination component {graph.components[dest]})",
        origin=origin, destination=dest, component=comp,
    )


def shortest_path(graph: NetworkGraph, origin: int, dest: int, w_d: float = 1.0, w_t: float = 1.0) -> Route:
    """Minimum-cost loopless route; raises NoPathError when unreachable."""
    _check_query(graph, origin, dest, w_d, w_t)
    found = _best_path(graph, origin, dest, w_d, w_t)
    if found is None:
        raise _no_path(graph, origin, dest)
    return graph.route_from_nodes(found[1])


def _path_cost(graph: NetworkGraph, nodes: Sequence[int], w_d: float, w_t: float) -> float:
    dist = 0.0
    time = 0.0
    for u, v in zip(nodes, nodes[1:]):
        e = graph.edge_between(u, v)
        dist += e.length_m
        time += e.travel_time_s
    return w_d * dist + w_t * time


def k_candidate_routes(graph: NetworkGraph, origin: int, dest: int, k: int = 4,
                       w_d: float = 1.0, w_t: float = 1.0) -> list[Route]:
    """Yen's k cheapest loopless routes in nondecreasing cost order."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValidationError(f"k must be an integer >= 1, got {k!r}")
    _check_query(graph, origin, dest, w_d, w_t)
    first = _best_path(graph, origin, dest, w_d, w_t)
    if first is None:
        raise _no_path(graph, origin, dest)

    accepted: list[tuple[int, ...]] = [first[1]]
    known: set[tuple[int, ...]] = {first[1]}
    pool: list[tuple[float, tuple[int, ...]]] = []

    while len(accepted) < k:
        prev = accepted[-1]
        for i in range(len(prev) - 1):
            root = prev[: i + 1]
            spur = prev[i]
            banned_edges = set()
            for path in accepted:
                if len(path) > i + 1 and path[: i + 1] == root:
                    e = graph.edge_between(path[i], path[i + 1])
                    banned_edges.add(e.index)
            found = _best_path(graph, spur, dest, w_d, w_t,
                               frozenset(root[:-1]), frozenset(banned_edges))
            if found is None:
                continue
            full = root[:-1] + found[1]
            if full in known:
                continue
            known.add(full)
            heapq.heappush(pool, (_path_cost(graph, full, w_d, w_t), full))
        if not pool:
            break
        accepted.append(heapq.heappop(pool)[1])

    return [graph.route_from_nodes(p) for p in accepted]
