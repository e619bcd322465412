"""Citywide candidate stops from layered data and their placement on a route.

A cell centre on a square grid becomes a candidate stop when it passes four
gates: permitted land-use category, minimum population density, enough
point-of-interest weight nearby, and a small enough elevation spread nearby.
Admitted cells are scored by density and POI weight, each divided by its
maximum over the admitted set.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, fields, replace
from typing import Any, Iterable, Sequence

from .errors import ValidationError
from .geo import (
    EARTH_RADIUS_M,
    GeoPoint,
    Polygon,
    Polyline,
    haversine_distance,
    locate_on_polyline,
    point_in_polygon,
)
from .network import Route

LANDUSE_CATEGORIES = frozenset(
    {"residential", "commercial", "industrial", "institutional", "open", "water", "other"}
)

_M_PER_DEG = math.radians(1.0) * EARTH_RADIUS_M


@dataclass(frozen=True)
class LandUseZone:
    geometry: Polygon
    category: str

    def __post_init__(self) -> None:
        if self.category not in LANDUSE_CATEGORIES:
            raise ValidationError(f"unknown land-use category {self.category!r}")


@dataclass(frozen=True)
class CensusUnit:
    geometry: Polygon
    population: float
    area_km2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.population) and self.population >= 0):
            raise ValidationError(f"population must be finite and >= 0, got {self.population}")
        if not (math.isfinite(self.area_km2) and self.area_km2 > 0):
            raise ValidationError(f"area_km2 must be finite and > 0, got {self.area_km2}")

    @property
    def density(self) -> float:
        return self.population / self.area_km2


@dataclass(frozen=True)
class PoiRecord:
    location: GeoPoint
    category: str
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.weight) and self.weight >= 0):
            raise ValidationError(f"POI weight must be finite and >= 0, got {self.weight}")


@dataclass(frozen=True)
class ElevationSample:
    location: GeoPoint
    elevation_m: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.elevation_m):
            raise ValidationError("elevation must be finite")


@dataclass(frozen=True)
class StopRules:
    min_density: float = 5000.0
    poi_radius_m: float = 800.0
    min_poi_weight: float = 1.0
    allowed_landuse: frozenset[str] = frozenset({"residential", "commercial", "institutional"})
    max_slope_gate: float = 30.0
    grid_cell_m: float = 500.0
    corridor_radius_m: float = 1000.0
    min_spacing_m: float = 1200.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "allowed_landuse", frozenset(self.allowed_landuse))
        bad = self.allowed_landuse - LANDUSE_CATEGORIES
        if bad:
            raise ValidationError(f"unknown land-use categories in allowed_landuse: {sorted(bad)}")
        for name in ("min_density", "poi_radius_m", "min_poi_weight", "max_slope_gate",
                     "grid_cell_m", "corridor_radius_m", "min_spacing_m"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be a finite number >= 0, got {v!r}")
        for name in ("grid_cell_m", "corridor_radius_m", "min_spacing_m"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0")

    @classmethod
    def from_mapping(cls, values: dict[str, Any], base: "StopRules | None" = None) -> "StopRules":
        base = base or cls()
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ValidationError(f"unknown stop rule(s): {', '.join(unknown)}")
        values = dict(values)
        if "allowed_landuse" in values:
            raw = values["allowed_landuse"]
            if isinstance(raw, str):
                raw = [s.strip() for s in raw.split(",") if s.strip()]
            values["allowed_landuse"] = frozenset(raw)
        return replace(base, **values)

    def to_dict(self) -> dict[str, Any]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["allowed_landuse"] = sorted(self.allowed_landuse)
        return d


@dataclass(frozen=True)
class CandidateStop:
    location: GeoPoint
    score: float
    density: float
    poi_weight: float
    landuse: str
    elevation_spread_m: float | None  # None when no sample is within range

    def to_properties(self) -> dict[str, Any]:
        return {
            "score": self.score,
            "density": self.density,
            "poi_weight": self.poi_weight,
            "landuse": self.landuse,
            "elevation_spread_m": self.elevation_spread_m,
        }


class _PointIndex:
    """Latitude-sorted points for radius queries."""

    def __init__(self, items: Sequence[tuple[GeoPoint, float]]):
        ordered = sorted(items, key=lambda it: (it[0].lat, it[0].lon))
        self._lats = [p.lat for p, _ in ordered]
        self._items = ordered

    def within(self, center: GeoPoint, radius_m: float) -> list[float]:
        dlat = radius_m / _M_PER_DEG + 1e-9
        lo = bisect.bisect_left(self._lats, center.lat - dlat)
        hi = bisect.bisect_right(self._lats, center.lat + dlat)
        return [v for p, v in self._items[lo:hi] if haversine_distance(center, p) <= radius_m]


def _first_containing(p: GeoPoint, items: Iterable, attr: str = "geometry"):
    for it in items:
        if point_in_polygon(p, getattr(it, attr)):
            return it
    return None


def grid_cell_centers(bbox: tuple[float, float, float, float], cell_m: float) -> list[GeoPoint]:
    """Centres of a square grid anchored at the south-west corner of ``bbox``.

    Halving ``cell_m`` nests four fine cells inside each coarse cell.
    """
    min_lat, min_lon, max_lat, max_lon = bbox
    mid = math.radians((min_lat + max_lat) / 2.0)
    dlat = cell_m / _M_PER_DEG
    dlon = dlat / max(math.cos(mid), 1e-6)
    n_lat = max(1, math.ceil((max_lat - min_lat) / dlat))
    n_lon = max(1, math.ceil((max_lon - min_lon) / dlon))
    centers = []
    for i in range(n_lat):
        lat = min_lat + (i + 0.5) * dlat
        if lat > 90.0:
            break
        for j in range(n_lon):
            lon = min_lon + (j + 0.5) * dlon
            if lon > 180.0:
                break
            centers.append(GeoPoint(lat, lon))
    return centers


def _zones_bbox(landuse, census) -> tuple[float, float, float, float]:
    boxes = [z.geometry.bbox for z in landuse] + [c.geometry.bbox for c in census]
    return (
        min(b[0] for b in boxes),
        min(b[1] for b in boxes),
        max(b[2] for b in boxes),
        max(b[3] for b in boxes),
    )


def evaluate_cell(p: GeoPoint, landuse, census, poi_index: _PointIndex, elev_index: _PointIndex,
                  rules: StopRules) -> tuple[float, float, str, float | None] | None:
    """Gate evidence for one location, or None when any gate fails."""
    zone = _first_containing(p, landuse)
    if zone is None or zone.category not in rules.allowed_landuse:
        return None
    unit = _first_containing(p, census)
    if unit is None or unit.density < rules.min_density:
        return None
    poi_weight = math.fsum(poi_index.within(p, rules.poi_radius_m))
    if poi_weight < rules.min_poi_weight:
        return None
    elevations = elev_index.within(p, rules.poi_radius_m)
    spread = (max(elevations) - min(elevations)) if elevations else None
    if spread is not None and spread > rules.max_slope_gate:
        return None
    return unit.density, poi_weight, zone.category, spread


def score_candidates(landuse: Sequence[LandUseZone], census: Sequence[CensusUnit],
                     pois: Sequence[PoiRecord], elevation: Sequence[ElevationSample],
                     rules: StopRules) -> list[CandidateStop]:
    """Admit grid cells through all gates; sorted by score, then (lat, lon)."""
    if not landuse:
        raise ValidationError("land-use layer is empty")
    if not census:
        raise ValidationError("census layer is empty")
    poi_index = _PointIndex([(p.location, p.weight) for p in pois])
    elev_index = _PointIndex([(s.location, s.elevation_m) for s in elevation])

    admitted = []
    for p in grid_cell_centers(_zones_bbox(landuse, census), rules.grid_cell_m):
        ev = evaluate_cell(p, landuse, census, poi_index, elev_index, rules)
        if ev is not None:
            admitted.append((p, ev))
    if not admitted:
        return []

    max_density = max(ev[0] for _, ev in admitted)
    max_poi = max(ev[1] for _, ev in admitted)
    out = []
    for p, (density, poi_w, category, spread) in admitted:
        score = (density / max_density if max_density > 0 else 0.0) + (poi_w / max_poi if max_poi > 0 else 0.0)
        out.append(CandidateStop(p, score, density, poi_w, category, spread))
    out.sort(key=lambda c: (-c.score, c.location.lat, c.location.lon))
    return out


@dataclass(frozen=True)
class PlacedStop:
    """A selected stop with its position relative to the route line."""

    stop: CandidateStop
    chainage_m: float
    offset_m: float


def place_route_stops(route: Route | Polyline, candidates: Sequence[CandidateStop],
                      rules: StopRules) -> list[PlacedStop]:
    """Greedy score-first selection of spaced stops inside the route corridor.

    Candidates whose nearest route point is the first or last vertex are
    treated as termini and skipped.
    """
    line = route.polyline() if isinstance(route, Route) else route
    total = line.length_m()
    inside: list[PlacedStop] = []
    for c in candidates:
        offset, chainage = locate_on_polyline(c.location, line)
        if offset > rules.corridor_radius_m:
            continue
        if chainage <= 0.0 or chainage >= total:
            continue
        inside.append(PlacedStop(c, chainage, offset))

    inside.sort(key=lambda s: (-s.stop.score, s.stop.location.lat, s.stop.location.lon))
    kept: list[PlacedStop] = []
    for s in inside:
        if all(abs(s.chainage_m - k.chainage_m) >= rules.min_spacing_m for k in kept):
            kept.append(s)
    kept.sort(key=lambda s: (s.chainage_m, s.stop.location.lat, s.stop.location.lon))
    return kept


def select_route_stops(route: Route | Polyline, candidates: Sequence[CandidateStop],
                       rules: StopRules) -> list[CandidateStop]:
    """Intermediate stops ordered along the route."""
    return [s.stop for s in place_route_stops(route, candidates, rules)]


@dataclass(frozen=True)
class VariationReport:
    model_count: int
    reference_count: int
    count_delta: int
    matched: tuple[tuple[int, int, float], ...]  # (model index, reference index, distance m)
    unmatched_model: tuple[int, ...]
    unmatched_reference: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "model_count": self.model_count,
            "reference_count": self.reference_count,
            "count_delta": self.count_delta,
            "matched": [
                {"model_index": i, "reference_index": j, "distance_m": d} for i, j, d in self.matched
            ],
            "unmatched_model": list(self.unmatched_model),
            "unmatched_reference": list(self.unmatched_reference),
        }


def _as_point(item) -> GeoPoint:
    if isinstance(item, GeoPoint):
        return item
    return item.location


def compare_with_reference(model: Sequence, reference: Sequence, radius_m: float) -> VariationReport:
    """Order-preserving matching of two stop sequences.

    A pair may match when the stops lie within ``radius_m`` of each other.
    The matching maximises the number of pairs, then minimises their summed
    distance; ``count_delta`` is model minus reference.
    """
    a = [_as_point(x) for x in model]
    b = [_as_point(x) for x in reference]
    n, m = len(a), len(b)
    dist = [[haversine_distance(p, q) for q in b] for p in a]
    # best[i][j]: (pairs, -distance) for suffixes a[i:], b[j:]
    best = [[(0, 0.0)] * (m + 1) for _ in range(n + 1)]
    move = [[0] * (m + 1) for _ in range(n + 1)]  # 0 skip model, 1 skip ref, 2 match
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            options = [(best[i + 1][j], 0), (best[i][j + 1], 1)]
            if dist[i][j] <= radius_m:
                cnt, neg = best[i + 1][j + 1]
                options.append(((cnt + 1, neg - dist[i][j]), 2))
            # ties favour matching, then skipping the model stop
            val, mv = max(options, key=lambda o: (o[0], o[1]))
            best[i][j] = val
            move[i][j] = mv
    matched = []
    i = j = 0
    while i < n and j < m:
        mv = move[i][j]
        if mv == 2:
            matched.append((i, j, dist[i][j]))
            i += 1
            j += 1
        elif mv == 0:
            i += 1
        else:
            j += 1
    used_a = {p[0] for p in matched}
    used_b = {p[1] for p in matched}
    return VariationReport(
        model_count=n,
        reference_count=m,
        count_delta=n - m,
        matched=tuple(matched),
        unmatched_model=tuple(i for i in range(n) if i not in used_a),
        unmatched_reference=tuple(j for j in range(m) if j not in used_b),
    )
