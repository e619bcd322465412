"""Dataset manifest loading, layer parsing and route providers.

Layers are parsed tolerantly: a malformed feature yields a diagnostic and
is dropped, but a layer losing more than 10% of its records aborts the
load. Nothing here touches the network.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import geojson
from .errors import DataLoadError, NoPathError, ParseError, ValidationError
from .geo import GeoPoint, Polyline, bounding_box
from .network import (
    Edge,
    NetworkGraph,
    Route,
    build_network,
    k_candidate_routes,
    network_to_feature_collection,
    parse_network_features,
)
from .stops import CensusUnit, ElevationSample, LandUseZone, PoiRecord

MAX_DROP_FRACTION = 0.10
LAYERS = ("network", "landuse", "census", "pois", "elevation")
_DEFAULT_FORMATS = {
    "network": "geojson",
    "landuse": "geojson",
    "census": "geojson",
    "pois": "geojson",
    "elevation": "csv",
}


@dataclass
class LayerReport:
    path: str
    total: int = 0
    loaded: int = 0
    diagnostics: list[geojson.Diagnostic] = field(default_factory=list)

    @property
    def dropped(self) -> int:
        return len(self.diagnostics)


@dataclass
class LoadReport:
    layers: dict[str, LayerReport] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = []
        for name, rep in self.layers.items():
            out.append(f"{name}: {rep.loaded} loaded, {rep.dropped} dropped ({rep.path})")
            out.extend(f"  {d}" for d in rep.diagnostics)
        return out


@dataclass(frozen=True)
class CityDataset:
    network: NetworkGraph
    landuse: tuple[LandUseZone, ...] = ()
    census: tuple[CensusUnit, ...] = ()
    pois: tuple[PoiRecord, ...] = ()
    elevation: tuple[ElevationSample, ...] = ()
    bbox: tuple[float, float, float, float] | None = None
    report: LoadReport = field(default_factory=LoadReport, compare=False)

    def __post_init__(self) -> None:
        box = _dataset_bbox(self)
        if self.bbox is None:
            object.__setattr__(self, "bbox", box)
        else:
            lo_lat, lo_lon, hi_lat, hi_lon = self.bbox
            if not (lo_lat <= box[0] and lo_lon <= box[1] and box[2] <= hi_lat and box[3] <= hi_lon):
                raise ValidationError(f"bounding box {self.bbox} does not enclose the dataset extent {box}")


def _dataset_points(ds: CityDataset):
    yield from ds.network.nodes
    for e in ds.network.edges:
        yield from e.geometry.points
    for z in ds.landuse:
        yield from z.geometry.exterior
    for c in ds.census:
        yield from c.geometry.exterior
    for p in ds.pois:
        yield p.location
    for s in ds.elevation:
        yield s.location


def _dataset_bbox(ds: CityDataset) -> tuple[float, float, float, float]:
    return bounding_box(_dataset_points(ds))


# --- per-layer parsers ---------------------------------------------------------

def _parse_features(features: list, source: str, build: Callable[[dict], Any]):
    items, diags = [], []
    for i, feat in enumerate(features):
        try:
            items.append(build(feat))
        except ParseError as exc:
            diags.append(geojson.Diagnostic(source, i, "geometry", str(exc), "parse"))
        except ValidationError as exc:
            diags.append(geojson.Diagnostic(source, i, "attributes", str(exc)))
    return items, diags


def _landuse(feat: dict) -> LandUseZone:
    poly = geojson.parse_polygon(feat)
    cat = geojson.feature_properties(feat).get("category")
    if not isinstance(cat, str):
        raise ValidationError(f"missing string property 'category', got {cat!r}")
    return LandUseZone(poly, cat)


def _census(feat: dict) -> CensusUnit:
    poly = geojson.parse_polygon(feat)
    props = geojson.feature_properties(feat)
    pop = geojson.number_property(props, "population")
    area = geojson.number_property(props, "area_km2", positive=True)
    return CensusUnit(poly, pop, area)


def _poi(feat: dict) -> PoiRecord:
    loc = geojson.parse_point(feat)
    props = geojson.feature_properties(feat)
    cat = props.get("category")
    if not isinstance(cat, str):
        raise ValidationError(f"missing string property 'category', got {cat!r}")
    weight = geojson.number_property(props, "weight", required=False, default=1.0)
    return PoiRecord(loc, cat, weight)


_GEOJSON_BUILDERS = {"landuse": _landuse, "census": _census, "pois": _poi}


def parse_elevation_csv(path: str | Path) -> tuple[list[ElevationSample], list[geojson.Diagnostic], int]:
    """Rows of ``lat, lon, elevation_m``; returns (samples, diagnostics, row count)."""
    source = str(path)
    samples, diags = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = {"lat", "lon", "elevation_m"} - set(header)
        if missing:
            raise ParseError(f"{source}: missing column(s) {sorted(missing)}")
        reader.fieldnames = header
        total = 0
        for i, row in enumerate(reader):
            total += 1
            try:
                lat = float(row["lat"])
                lon = float(row["lon"])
                elev = float(row["elevation_m"])
            except (TypeError, ValueError):
                diags.append(geojson.Diagnostic(source, i, "row", f"non-numeric value in {dict(row)!r}", "parse"))
                continue
            try:
                samples.append(ElevationSample(GeoPoint(lat, lon), elev))
            except ValidationError as exc:
                diags.append(geojson.Diagnostic(source, i, "row", str(exc)))
    return samples, diags, total


# --- manifest ------------------------------------------------------------------

def _layer_entries(manifest: dict, base: Path, manifest_path: str) -> dict[str, tuple[Path, str]]:
    layers = manifest.get("layers")
    if not isinstance(layers, dict):
        raise DataLoadError(f"{manifest_path}: manifest has no [layers] table")
    unknown = sorted(set(layers) - set(LAYERS))
    if unknown:
        raise DataLoadError(f"{manifest_path}: unknown layer(s) {unknown}")
    out = {}
    for name, entry in layers.items():
        if isinstance(entry, str):
            path, fmt = entry, _DEFAULT_FORMATS[name]
        elif isinstance(entry, dict) and isinstance(entry.get("path"), str):
            path, fmt = entry["path"], entry.get("format", _DEFAULT_FORMATS[name])
        else:
            raise DataLoadError(f"{manifest_path}: layer '{name}' needs a path")
        if fmt != _DEFAULT_FORMATS[name]:
            raise DataLoadError(f"{manifest_path}: layer '{name}' format {fmt!r} unsupported "
                                f"(expected {_DEFAULT_FORMATS[name]!r})")
        out[name] = ((base / path).resolve() if not Path(path).is_absolute() else Path(path), fmt)
    return out


def _check_drop_rate(name: str, rep: LayerReport) -> None:
    if rep.total and rep.dropped / rep.total > MAX_DROP_FRACTION:
        shown = "; ".join(str(d) for d in rep.diagnostics[:5])
        raise DataLoadError(
            f"layer '{name}' ({rep.path}): {rep.dropped} of {rep.total} features dropped "
            f"(> {MAX_DROP_FRACTION:.0%}): {shown}"
        )


def load_city_dataset(manifest_path: str | Path) -> CityDataset:
    """Parse every layer named in a TOML manifest into a CityDataset."""
    manifest_path = Path(manifest_path)
    try:
        manifest = tomllib.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataLoadError(f"manifest not found: {manifest_path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise DataLoadError(f"{manifest_path}: invalid manifest: {exc}") from exc

    entries = _layer_entries(manifest, manifest_path.parent, str(manifest_path))
    if "network" not in entries:
        raise DataLoadError(f"{manifest_path}: mandatory layer 'network' is not listed")
    for name, (path, _) in entries.items():
        if not path.is_file():
            raise DataLoadError(f"layer '{name}': file not found: {path}")

    report = LoadReport()
    loaded: dict[str, Any] = {}
    for name in LAYERS:
        if name not in entries:
            continue
        path, _ = entries[name]
        rep = LayerReport(str(path))
        report.layers[name] = rep
        try:
            if name == "elevation":
                items, diags, rep.total = parse_elevation_csv(path)
            else:
                features = geojson.read_feature_collection(path)
                rep.total = len(features)
                if name == "network":
                    items, diags = parse_network_features(features, str(path))
                else:
                    items, diags = _parse_features(features, str(path), _GEOJSON_BUILDERS[name])
        except ParseError as exc:
            raise DataLoadError(f"layer '{name}': {exc}") from exc
        rep.diagnostics.extend(diags)
        if name == "network":
            _check_drop_rate(name, rep)
            if not items:
                raise DataLoadError(f"layer 'network' ({path}): network is empty")
            weights = manifest.get("network", {}).get("merge_weights", [1.0, 1.0])
            graph, build_diags = build_network(items, str(path), tuple(weights))
            rep.diagnostics.extend(build_diags)
            items = graph
            rep.loaded = rep.total - rep.dropped
        else:
            rep.loaded = len(items)
        _check_drop_rate(name, rep)
        loaded[name] = items

    bbox = manifest.get("bbox")
    if bbox is not None:
        if not (isinstance(bbox, list) and len(bbox) == 4):
            raise DataLoadError(f"{manifest_path}: bbox must be [min_lat, min_lon, max_lat, max_lon]")
        bbox = tuple(float(v) for v in bbox)
    try:
        return CityDataset(
            network=loaded["network"],
            landuse=tuple(loaded.get("landuse", ())),
            census=tuple(loaded.get("census", ())),
            pois=tuple(loaded.get("pois", ())),
            elevation=tuple(loaded.get("elevation", ())),
            bbox=bbox,
            report=report,
        )
    except ValidationError as exc:
        raise DataLoadError(f"{manifest_path}: {exc}") from exc


def write_dataset(ds: CityDataset, directory: str | Path) -> Path:
    """Write every layer plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    geojson.write_json(directory / "network.geojson", network_to_feature_collection(ds.network))
    geojson.write_json(directory / "landuse.geojson", geojson.feature_collection(
        [geojson.polygon_feature(z.geometry, {"category": z.category}) for z in ds.landuse]))
    geojson.write_json(directory / "census.geojson", geojson.feature_collection(
        [geojson.polygon_feature(c.geometry, {"population": c.population, "area_km2": c.area_km2})
         for c in ds.census]))
    geojson.write_json(directory / "pois.geojson", geojson.feature_collection(
        [geojson.point_feature(p.location, {"category": p.category, "weight": p.weight}) for p in ds.pois]))
    with open(directory / "elevation.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["lat", "lon", "elevation_m"])
        for s in ds.elevation:
            w.writerow([repr(s.location.lat), repr(s.location.lon), repr(s.elevation_m)])
    manifest = directory / "manifest.toml"
    manifest.write_text(
        "[layers]\n"
        'network = "network.geojson"\n'
        'landuse = "landuse.geojson"\n'
        'census = "census.geojson"\n'
        'pois = "pois.geojson"\n'
        'elevation = "elevation.csv"\n',
        encoding="utf-8",
    )
    return manifest


# --- route providers -------------------------------------------------------------

class RouteProvider(Protocol):
    """Anything that can list candidate routes between two endpoints."""

    def routes(self, origin: Any, destination: Any, k: int | None = None) -> list[Route]: ...


class GraphRouteProvider:
    """Candidate routes from the loaded network via k-shortest loopless paths."""

    def __init__(self, graph: NetworkGraph, w_d: float = 1.0, w_t: float = 1.0, default_k: int = 4):
        self.graph = graph
        self.w_d = w_d
        self.w_t = w_t
        self.default_k = default_k

    def routes(self, origin: int, destination: int, k: int | None = None) -> list[Route]:
        return k_candidate_routes(self.graph, origin, destination, k or self.default_k, self.w_d, self.w_t)


class StubRouteProvider:
    """Returns canned routes verbatim, keyed by ``"<origin>-><destination>"``."""

    def __init__(self, pairs: dict[str, list[Route]]):
        self.pairs = pairs

    def routes(self, origin: str, destination: str, k: int | None = None) -> list[Route]:
        key = f"{origin}->{destination}"
        if key not in self.pairs:
            raise NoPathError(f"no canned routes for {key}", origin=origin, destination=destination)
        found = self.pairs[key]
        return list(found if k is None else found[:k])


def _canned_route(raw: Any, where: str) -> Route:
    if not isinstance(raw, dict):
        raise ValidationError(f"{where}: route must be an object")
    nodes = raw.get("nodes")
    edges_raw = raw.get("edges")
    if not isinstance(nodes, list) or not isinstance(edges_raw, list):
        raise ValidationError(f"{where}: route needs 'nodes' and 'edges' arrays")
    if len(nodes) != len(edges_raw) + 1:
        raise ValidationError(f"{where}: expected {len(edges_raw) + 1} nodes for {len(edges_raw)} edges")
    edges = []
    for i, e in enumerate(edges_raw):
        if not isinstance(e, dict):
            raise ValidationError(f"{where} edge {i}: not an object")
        try:
            pts = tuple(GeoPoint.from_lonlat(c) for c in e.get("coordinates", []))
            edges.append(Edge(i, nodes[i], nodes[i + 1],
                              geojson.number_property(e, "length_m", positive=True),
                              geojson.number_property(e, "travel_time_s", positive=True),
                              Polyline(pts)))
        except (ValidationError, TypeError) as exc:
            raise ValidationError(f"{where} edge {i}: {exc}") from exc
    try:
        return Route(tuple(nodes), tuple(edges),
                     float(raw.get("total_distance_m", math.nan)),
                     float(raw.get("total_time_s", math.nan)))
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def stub_provider(path: str | Path) -> StubRouteProvider:
    """Load a canned-routes JSON file; any invalid route fails the load."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    pairs_raw = doc.get("pairs") if isinstance(doc, dict) else None
    if not isinstance(pairs_raw, dict):
        raise ParseError(f"{path}: expected an object with a 'pairs' table")
    pairs: dict[str, list[Route]] = {}
    for key, routes in pairs_raw.items():
        if "->" not in key or not isinstance(routes, list):
            raise ValidationError(f"{path}: pair {key!r} must be 'origin->destination' mapping to a list")
        pairs[key] = [_canned_route(r, f"{path} pair {key!r} route {i}") for i, r in enumerate(routes)]
    return StubRouteProvider(pairs)


def route_to_canned(route: Route) -> dict:
    """Inverse of the canned-route schema, for writing stub files."""
    return {
        "nodes": list(route.nodes),
        "total_distance_m": route.total_distance_m,
        "total_time_s": route.total_time_s,
        "edges": [
            {
                "length_m": e.length_m,
                "travel_time_s": e.travel_time_s,
                "coordinates": [p.to_lonlat() for p in e.geometry.points],
            }
            for e in route.edges
        ],
    }


def load_reference_stops(path: str | Path) -> list[GeoPoint]:
    """Point features in along-route order."""
    path = Path(path)
    features = geojson.read_feature_collection(path)
    out = []
    for i, feat in enumerate(features):
        try:
            out.append(geojson.parse_point(feat))
        except ParseError as exc:
            raise ParseError(f"{path} feature {i}: {exc}") from exc
    return out


__all__ = [
    "CityDataset",
    "GraphRouteProvider",
    "LoadReport",
    "RouteProvider",
    "StubRouteProvider",
    "load_city_dataset",
    "load_reference_stops",
    "route_to_canned",
    "stub_provider",
    "write_dataset",
]
