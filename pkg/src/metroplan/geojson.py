"""Minimal GeoJSON reading/writing used by the loaders and the CLI.

Only the geometry types the toolkit consumes are understood: Point,
LineString and Polygon. Positions are ``[lon, lat]`` per RFC 7946.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .errors import ParseError, ValidationError
from .geo import GeoPoint, Polygon


@dataclass(frozen=True)
class Diagnostic:
    """One rejected input record."""

    file: str
    feature_index: int | None
    rule: str
    message: str
    kind: str = "validation"  # "parse" or "validation"

    def __str__(self) -> str:
        where = f"{self.file}"
        if self.feature_index is not None:
            where += f" feature {self.feature_index}"
        return f"{where}: [{self.rule}] {self.message}"

    def raise_(self) -> None:
        cls = ParseError if self.kind == "parse" else ValidationError
        raise cls(str(self))


def read_feature_collection(path: str | Path) -> list[Any]:
    """Load the ``features`` array of a FeatureCollection file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise ParseError(f"{path}: cannot read: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: top-level object is not a FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise ParseError(f"{path}: FeatureCollection has no 'features' array")
    return features


def _position(raw: Any) -> GeoPoint:
    if not isinstance(raw, (list, tuple)) or len(raw) < 2:
        raise ParseError(f"bad position {raw!r}")
    lon, lat = raw[0], raw[1]
    if isinstance(lon, bool) or isinstance(lat, bool):
        raise ParseError(f"bad position {raw!r}")
    try:
        return GeoPoint(lat=lat, lon=lon)
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def feature_geometry(feature: Any, expected: str) -> Any:
    """Return the coordinates of ``feature`` after checking its geometry type."""
    if not isinstance(feature, dict) or feature.get("type") != "Feature":
        raise ParseError("not a Feature object")
    geom = feature.get("geometry")
    if not isinstance(geom, dict):
        raise ParseError("feature has no geometry")
    if geom.get("type") != expected:
        raise ParseError(f"expected {expected} geometry, got {geom.get('type')!r}")
    coords = geom.get("coordinates")
    if not isinstance(coords, list):
        raise ParseError("geometry has no coordinates array")
    return coords


def feature_properties(feature: dict) -> dict:
    props = feature.get("properties")
    if props is None:
        return {}
    if not isinstance(props, dict):
        raise ParseError("properties is not an object")
    return props


def parse_point(feature: Any) -> GeoPoint:
    return _position(feature_geometry(feature, "Point"))


def parse_linestring(feature: Any) -> list[GeoPoint]:
    """Positions of a LineString with consecutive duplicates collapsed."""
    coords = feature_geometry(feature, "LineString")
    pts: list[GeoPoint] = []
    for raw in coords:
        p = _position(raw)
        if not pts or pts[-1] != p:
            pts.append(p)
    if len(pts) < 2:
        raise ParseError("LineString needs at least two distinct positions")
    return pts


def parse_polygon(feature: Any) -> Polygon:
    coords = feature_geometry(feature, "Polygon")
    if not coords:
        raise ParseError("Polygon has no rings")
    rings = []
    for ring in coords:
        if not isinstance(ring, list):
            raise ParseError("ring is not an array")
        rings.append(tuple(_position(raw) for raw in ring))
    try:
        return Polygon(exterior=rings[0], holes=tuple(rings[1:]))
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def number_property(props: dict, name: str, *, positive: bool = False, required: bool = True,
                    default: float | None = None) -> float | None:
    """Fetch a finite numeric property or raise ValidationError."""
    if name not in props or props[name] is None:
        if required:
            raise ValidationError(f"missing numeric property '{name}'")
        return default
    value = props[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"property '{name}' is not numeric: {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"property '{name}' is not finite")
    if positive and value <= 0:
        raise ValidationError(f"property '{name}' must be > 0, got {value}")
    return float(value)


# --- writing -----------------------------------------------------------------

def point_feature(p: GeoPoint, properties: dict | None = None) -> dict:
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": p.to_lonlat()},
        "properties": properties or {},
    }


def line_feature(points: Iterable[GeoPoint], properties: dict | None = None) -> dict:
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": [p.to_lonlat() for p in points]},
        "properties": properties or {},
    }


def polygon_feature(poly: Polygon, properties: dict | None = None) -> dict:
    return {
        "type": "Feature",
        "geometry": {
            "type": "Polygon",
            "coordinates": [[p.to_lonlat() for p in ring] for ring in poly.rings()],
        },
        "properties": properties or {},
    }


def feature_collection(features: list[dict]) -> dict:
    return {"type": "FeatureCollection", "features": features}


def dumps(doc: Any) -> str:
    """Stable serialisation: fixed key order as built, repr floats, trailing newline."""
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: str | Path, doc: Any) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")
