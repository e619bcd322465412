"""Coordinate types and geometric predicates on a spherical Earth.

Distances use the haversine formula with a mean Earth radius of 6,371 km.
Point-in-polygon treats lon/lat as planar x/y, which is adequate at city
scale. Point-to-segment distances use a local equirectangular frame centred
on the query point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError

EARTH_RADIUS_M = 6_371_000.0

# Boundary tolerance for planar predicates, in degrees (~1 mm).
_EPS_DEG = 1e-8


@dataclass(frozen=True, order=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self) -> None:
        lat, lon = self.lat, self.lon
        if not (isinstance(lat, (int, float)) and isinstance(lon, (int, float))):
            raise ValidationError(f"coordinates must be numeric, got ({lat!r}, {lon!r})")
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise ValidationError(f"coordinates must be finite, got ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise ValidationError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise ValidationError(f"longitude {lon} outside [-180, 180]")
        # normalise ints so equality and JSON output are stable
        object.__setattr__(self, "lat", float(lat))
        object.__setattr__(self, "lon", float(lon))

    @classmethod
    def from_lonlat(cls, coord: Sequence[float]) -> "GeoPoint":
        """Build from a GeoJSON-style ``[lon, lat]`` pair."""
        if len(coord) < 2:
            raise ValidationError(f"position needs two values, got {list(coord)!r}")
        return cls(lat=coord[1], lon=coord[0])

    def to_lonlat(self) -> list[float]:
        return [self.lon, self.lat]


@dataclass(frozen=True)
class Polyline:
    points: tuple[GeoPoint, ...]

    def __post_init__(self) -> None:
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValidationError("polyline needs at least two points")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValidationError(f"polyline has consecutive duplicate point {a}")

    def __len__(self) -> int:
        return len(self.points)

    def length_m(self) -> float:
        return sum(haversine_distance(a, b) for a, b in zip(self.points, self.points[1:]))


def _ring_closed(ring: Sequence[GeoPoint]) -> bool:
    return len(ring) >= 4 and ring[0] == ring[-1]


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = _orient(p3[0], p3[1], p4[0], p4[1], p1[0], p1[1])
    d2 = _orient(p3[0], p3[1], p4[0], p4[1], p2[0], p2[1])
    d3 = _orient(p1[0], p1[1], p2[0], p2[1], p3[0], p3[1])
    d4 = _orient(p1[0], p1[1], p2[0], p2[1], p4[0], p4[1])
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def on_seg(a, b, c, d):
        return d == 0 and min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return (
        on_seg(p3, p4, p1, d1)
        or on_seg(p3, p4, p2, d2)
        or on_seg(p1, p2, p3, d3)
        or on_seg(p1, p2, p4, d4)
    )


def ring_self_intersects(ring: Sequence[GeoPoint]) -> bool:
    """Pairwise check of non-adjacent ring segments."""
    xy = [(p.lon, p.lat) for p in ring]
    segs = list(zip(xy, xy[1:]))
    n = len(segs)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(segs[i][0], segs[i][1], segs[j][0], segs[j][1]):
                return True
    return False


@dataclass(frozen=True)
class Polygon:
    exterior: tuple[GeoPoint, ...]
    holes: tuple[tuple[GeoPoint, ...], ...] = ()

    def __post_init__(self) -> None:
        ext = tuple(self.exterior)
        holes = tuple(tuple(h) for h in self.holes)
        object.__setattr__(self, "exterior", ext)
        object.__setattr__(self, "holes", holes)
        if not _ring_closed(ext):
            raise ValidationError("exterior ring must be closed with at least 4 points")
        for h in holes:
            if not _ring_closed(h):
                raise ValidationError("interior ring must be closed with at least 4 points")
        if ring_self_intersects(ext):
            raise ValidationError("exterior ring self-intersects")
        lats = [p.lat for p in ext]
        lons = [p.lon for p in ext]
        object.__setattr__(self, "_bbox", (min(lats), min(lons), max(lats), max(lons)))

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        """``(min_lat, min_lon, max_lat, max_lon)`` of the exterior ring."""
        return self._bbox  # type: ignore[attr-defined]

    def rings(self) -> Iterable[tuple[GeoPoint, ...]]:
        yield self.exterior
        yield from self.holes


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters."""
    # Sort the pair so the result is bitwise symmetric.
    if (b.lat, b.lon) < (a.lat, a.lon):
        a, b = b, a
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _on_segment(px, py, ax, ay, bx, by) -> bool:
    if not (min(ax, bx) - _EPS_DEG <= px <= max(ax, bx) + _EPS_DEG):
        return False
    if not (min(ay, by) - _EPS_DEG <= py <= max(ay, by) + _EPS_DEG):
        return False
    seg = math.hypot(bx - ax, by - ay)
    if seg == 0.0:
        return math.hypot(px - ax, py - ay) <= _EPS_DEG
    return abs(_orient(ax, ay, bx, by, px, py)) / seg <= _EPS_DEG


def _ring_position(px: float, py: float, ring: Sequence[GeoPoint]) -> int:
    """1 inside, 0 on boundary, -1 outside (even-odd ray casting)."""
    inside = False
    n = len(ring)
    for i in range(n - 1):
        a, b = ring[i], ring[i + 1]
        ax, ay, bx, by = a.lon, a.lat, b.lon, b.lat
        if _on_segment(px, py, ax, ay, bx, by):
            return 0
        if (ay > py) != (by > py):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < x_cross:
                inside = not inside
    return 1 if inside else -1


def point_in_polygon(p: GeoPoint, poly: Polygon) -> bool:
    """Containment with boundary points counted as inside; holes subtract."""
    min_lat, min_lon, max_lat, max_lon = poly.bbox
    if not (min_lat - _EPS_DEG <= p.lat <= max_lat + _EPS_DEG and min_lon - _EPS_DEG <= p.lon <= max_lon + _EPS_DEG):
        return False
    pos = _ring_position(p.lon, p.lat, poly.exterior)
    if pos == 0:
        return True
    if pos < 0:
        return False
    for hole in poly.holes:
        hpos = _ring_position(p.lon, p.lat, hole)
        if hpos == 0:
            return True
        if hpos > 0:
            return False
    return True


def _local_xy(origin: GeoPoint, q: GeoPoint) -> tuple[float, float]:
    k = math.radians(1.0) * EARTH_RADIUS_M
    return (
        (q.lon - origin.lon) * k * math.cos(math.radians(origin.lat)),
        (q.lat - origin.lat) * k,
    )


def _segment_param(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> tuple[float, float]:
    """Planar distance from ``p`` to segment ``ab`` and the clamped parameter t."""
    ax, ay = _local_xy(p, a)
    bx, by = _local_xy(p, b)
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        t = 0.0
    else:
        t = max(0.0, min(1.0, -(ax * dx + ay * dy) / seg2))
    cx, cy = ax + t * dx, ay + t * dy
    return math.hypot(cx, cy), t


def distance_point_to_polyline(p: GeoPoint, line: Polyline) -> float:
    """Minimum distance in meters from ``p`` to any segment of ``line``."""
    pts = line.points
    return min(_segment_param(p, a, b)[0] for a, b in zip(pts, pts[1:]))


def locate_on_polyline(p: GeoPoint, line: Polyline) -> tuple[float, float]:
    """Return ``(offset_m, chainage_m)`` of the nearest point on ``line``.

    ``chainage_m`` is the along-line distance from the first vertex to the
    foot of the perpendicular, with segment lengths measured by haversine.
    Ties on offset resolve to the earliest segment.
    """
    pts = line.points
    best_d = math.inf
    best_s = 0.0
    cum = 0.0
    for a, b in zip(pts, pts[1:]):
        d, t = _segment_param(p, a, b)
        seg_len = haversine_distance(a, b)
        if d < best_d:
            best_d = d
            best_s = cum + t * seg_len
        cum += seg_len
    return best_d, best_s


def bounding_box(points: Iterable[GeoPoint]) -> tuple[float, float, float, float] | None:
    """``(min_lat, min_lon, max_lat, max_lon)`` or None for no points."""
    lats: list[float] = []
    lons: list[float] = []
    for p in points:
        lats.append(p.lat)
        lons.append(p.lon)
    if not lats:
        return None
    return min(lats), min(lons), max(lats), max(lons)
