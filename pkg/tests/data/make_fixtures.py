"""Regenerate the committed fixture files under tests/data/.

Run from the repository root::

    python tests/data/make_fixtures.py

Expected outputs for chennai_mini are computed with the independent
oracles in tests/oracles.py (path enumeration, brute-force gates and
sampled chainage), never with the code under test.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from metroplan.geo import GeoPoint, Polygon  # noqa: E402
from metroplan.network import NetworkGraph  # noqa: E402
from metroplan.stops import CensusUnit, ElevationSample, LandUseZone, PoiRecord, StopRules  # noqa: E402

import oracles  # noqa: E402


def dump(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def line(coords, **props):
    return {"type": "Feature", "geometry": {"type": "LineString", "coordinates": coords}, "properties": props}


def point(lon, lat, **props):
    return {"type": "Feature", "geometry": {"type": "Point", "coordinates": [lon, lat]}, "properties": props}


def rect(lat0, lon0, lat1, lon1, **props):
    ring = [[lon0, lat0], [lon1, lat0], [lon1, lat1], [lon0, lat1], [lon0, lat0]]
    return {"type": "Feature", "geometry": {"type": "Polygon", "coordinates": [ring]}, "properties": props}


def fc(features):
    return {"type": "FeatureCollection", "features": features}


def write_csv(path: Path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lat", "lon", "elevation_m"])
        w.writerows(rows)


def write_manifest(path: Path, layers: dict) -> None:
    body = "[layers]\n" + "".join(f'{k} = "{v}"\n' for k, v in layers.items())
    path.write_text(body, encoding="utf-8")


ALL_LAYERS = {
    "network": "network.geojson",
    "landuse": "landuse.geojson",
    "census": "census.geojson",
    "pois": "pois.geojson",
    "elevation": "elevation.csv",
}


# --- small network fixtures ---------------------------------------------------------

def make_small():
    d = HERE / "two_node"
    dump(d / "network.geojson", fc([
        line([[80.2, 13.0], [80.21, 13.0]], length_m=1085.0, travel_time_s=90.0, oneway=True),
    ]))
    d = HERE / "bad_time"
    dump(d / "network.geojson", fc([
        line([[80.2, 13.0], [80.21, 13.0]], length_m=1000.0, travel_time_s=60.0),
        line([[80.21, 13.0], [80.22, 13.0]], length_m=1000.0, travel_time_s=0),
    ]))


# --- gridville: 5x5 lattice, uniform edge costs ----------------------------------------

G_LAT0, G_LON0, G_STEP = 13.0, 80.2, 0.009


def gnode(r, c):
    return [round(G_LON0 + G_STEP * c, 6), round(G_LAT0 + G_STEP * r, 6)]


def make_gridville():
    d = HERE / "gridville"
    feats = []
    for r in range(5):
        for c in range(5):
            if c < 4:
                feats.append(line([gnode(r, c), gnode(r, c + 1)], length_m=1000.0, travel_time_s=60.0))
            if r < 4:
                feats.append(line([gnode(r, c), gnode(r + 1, c)], length_m=1000.0, travel_time_s=60.0))
    dump(d / "network.geojson", fc(feats))

    lat_lo, lat_mid, lat_hi = 12.995, 13.018, 13.041
    lon_lo, lon_mid, lon_hi = 80.195, 80.218, 80.241
    quads = [
        (lat_lo, lon_lo, lat_mid, lon_mid),  # SW
        (lat_lo, lon_mid, lat_mid, lon_hi),  # SE
        (lat_mid, lon_lo, lat_hi, lon_mid),  # NW
        (lat_mid, lon_mid, lat_hi, lon_hi),  # NE
    ]
    cats = ["residential", "commercial", "industrial", "open"]
    pops = [64000, 38400, 12800, 3200]
    dump(d / "landuse.geojson", fc([rect(*q, category=c) for q, c in zip(quads, cats)]))
    dump(d / "census.geojson", fc([rect(*q, population=p, area_km2=6.4) for q, p in zip(quads, pops)]))
    pois = [
        point(80.2045, 13.0045, category="market", weight=3.0),
        point(80.2135, 13.0000, category="school", weight=1.0),
        point(80.2270, 13.0045, category="hospital", weight=2.0),
        point(80.2360, 13.0090, category="mall"),
        point(80.2045, 13.0315, category="factory", weight=1.0),
        point(80.2315, 13.0360, category="park", weight=0.5),
    ]
    dump(d / "pois.geojson", fc(pois))
    rows = []
    elev = [[6.0, 8.0, 12.0], [7.0, 9.0, 15.0], [8.0, 11.0, 60.0]]
    for i, lat in enumerate((12.998, 13.018, 13.038)):
        for j, lon in enumerate((80.198, 80.218, 80.238)):
            rows.append([lat, lon, elev[i][j]])
    write_csv(d / "elevation.csv", rows)
    write_manifest(d / "manifest.toml", ALL_LAYERS)
    write_manifest(d / "manifest_min.toml", {"network": "network.geojson"})
    (d / "run.toml").write_text(
        'manifest = "manifest.toml"\n'
        "origin = 0\n"
        "dest = 24\n"
        "k = 4\n"
        "seed = 7\n"
        'out = "out"\n'
        "\n[stops]\n"
        "min_density = 5000.0\n"
        "poi_radius_m = 800.0\n"
        "min_poi_weight = 1.0\n"
        'allowed_landuse = ["residential", "commercial"]\n'
        "grid_cell_m = 500.0\n"
        "corridor_radius_m = 1000.0\n"
        "min_spacing_m = 1200.0\n",
        encoding="utf-8",
    )


# --- diamond: arm A short distance / slow, arm B long distance / fast ----------------------

def make_diamond():
    d = HERE / "diamond"
    o, a, b, t = [80.20, 13.00], [80.21, 13.01], [80.21, 12.99], [80.22, 13.00]
    dump(d / "network.geojson", fc([
        line([o, a], length_m=1000.0, travel_time_s=300.0, oneway=True),
        line([o, b], length_m=1500.0, travel_time_s=100.0, oneway=True),
        line([a, t], length_m=1000.0, travel_time_s=300.0, oneway=True),
        line([b, t], length_m=1500.0, travel_time_s=100.0, oneway=True),
    ]))
    write_manifest(d / "manifest.toml", {"network": "network.geojson"})
    # the far island makes node 4/5 unreachable from the diamond
    dump(d / "network_island.geojson", fc([
        line([o, a], length_m=1000.0, travel_time_s=300.0, oneway=True),
        line([o, b], length_m=1500.0, travel_time_s=100.0, oneway=True),
        line([a, t], length_m=1000.0, travel_time_s=300.0, oneway=True),
        line([b, t], length_m=1500.0, travel_time_s=100.0, oneway=True),
        line([[80.30, 13.10], [80.31, 13.10]], length_m=1000.0, travel_time_s=60.0),
    ]))
    write_manifest(d / "manifest_island.toml", {"network": "network_island.geojson"})


def make_single_path():
    d = HERE / "single_path"
    pts = [[80.20, 13.00], [80.21, 13.00], [80.22, 13.005], [80.23, 13.005]]
    dump(d / "network.geojson", fc([
        line([pts[i], pts[i + 1]], length_m=1000.0 + 100 * i, travel_time_s=70.0 + 5 * i, oneway=True)
        for i in range(3)
    ]))
    write_manifest(d / "manifest.toml", {"network": "network.geojson"})


# --- chennai_mini: 3 lanes x 20 columns corridor --------------------------------------------

CM_LANES = (12.90, 12.91, 12.92)
CM_LON0, CM_STEP, CM_COLS = 80.10, 0.0093, 20
CM_CROSS = (2, 5, 8, 11, 14, 17)
# (length_m, travel_time_s) for an eastward segment starting at column c on a lane
def cm_segment(lane, c):
    if lane == 0:
        return 1000.0, 125.0
    if lane == 1:
        if c < 5:
            return 1010.0, 120.0
        return (1010.0, 560.0) if c < 11 else (1010.0, 112.0)
    return 1150.0, 95.0


CM_CROSS_COST = (1150.0, 80.0)


def cm_node(lane, c):
    return [round(CM_LON0 + CM_STEP * c, 6), CM_LANES[lane]]


def cm_layers():
    lat0, lat1 = 12.885, 12.935
    landuse = [
        rect(lat0, 80.090, lat1, 80.130, category="residential"),
        rect(lat0, 80.130, lat1, 80.170, category="commercial"),
        rect(lat0, 80.170, lat1, 80.186, category="water"),
        rect(lat0, 80.186, lat1, 80.240, category="institutional"),
        rect(lat0, 80.240, lat1, 80.290, category="residential"),
    ]
    census = [
        rect(lat0, 80.090, lat1, 80.150, population=96000, area_km2=8.0),
        rect(lat0, 80.150, lat1, 80.206, population=72000, area_km2=9.0),
        rect(lat0, 80.206, lat1, 80.212, population=9000, area_km2=3.0),
        rect(lat0, 80.212, lat1, 80.290, population=99000, area_km2=11.0),
    ]
    pois = []
    kinds = ["bus terminus", "market", "college", "temple", "hospital", "mall", "office park",
             "school", "stadium", "library", "clinic", "theatre", "tech park", "bazaar", "museum",
             "bank", "cinema"]
    weights = [3.0, 2.0, 2.5, 1.5, 2.0]
    for i in range(21):
        lon = round(80.104 + 0.009 * i, 6)
        lane_lat = 12.90 if 80.1465 <= lon <= 80.2023 else 12.91
        lat = round(lane_lat + (0.0015 if i % 2 else -0.0015), 6)
        pois.append(point(lon, lat, category=kinds[i % len(kinds)], weight=weights[i % 5]))
    pois.append(point(80.1400, 12.9300, category="fort", weight=5.0))
    elevation = [
        [12.905, 80.120, 12.0], [12.905, 80.160, 14.0], [12.905, 80.200, 9.0],
        [12.909, 80.2635, 6.0], [12.911, 80.2650, 48.0], [12.915, 80.240, 10.0],
    ]
    return landuse, census, pois, elevation


CM_RULES = dict(
    min_density=5000.0,
    poi_radius_m=700.0,
    min_poi_weight=1.5,
    allowed_landuse=["residential", "commercial", "institutional"],
    max_slope_gate=30.0,
    grid_cell_m=500.0,
    corridor_radius_m=1000.0,
    min_spacing_m=1200.0,
)


def make_chennai_mini():
    d = HERE / "chennai_mini"
    feats = []
    for lane in range(3):
        for c in range(CM_COLS - 1):
            length, time = cm_segment(lane, c)
            feats.append(line([cm_node(lane, c), cm_node(lane, c + 1)], length_m=length,
                              travel_time_s=time, oneway=True))
    for c in CM_CROSS:
        for lane in range(2):
            feats.append(line([cm_node(lane, c), cm_node(lane + 1, c)], length_m=CM_CROSS_COST[0],
                              travel_time_s=CM_CROSS_COST[1]))
    dump(d / "network.geojson", fc(feats))
    landuse, census, pois, elevation = cm_layers()
    dump(d / "landuse.geojson", fc(landuse))
    dump(d / "census.geojson", fc(census))
    dump(d / "pois.geojson", fc(pois))
    write_csv(d / "elevation.csv", elevation)
    write_manifest(d / "manifest.toml", ALL_LAYERS)

    run = (
        'manifest = "manifest.toml"\n'
        "origin = [12.91, 80.1]\n"
        f"dest = [12.91, {round(CM_LON0 + CM_STEP * (CM_COLS - 1), 6)}]\n"
        "k = 4\n"
        "seed = 2024\n"
        'out = "out"\n'
        "\n[stops]\n"
        + "".join(
            f"{k} = {json.dumps(v)}\n" for k, v in CM_RULES.items()
        )
    )
    (d / "run.toml").write_text(run, encoding="utf-8")
    return d


def chennai_expected(d: Path):
    """Oracle trace of the chennai_mini fixture."""
    # Node ids follow first appearance in network.geojson (lane-major, west to east).
    feats = json.loads((d / "network.geojson").read_text())["features"]
    coords, index = [], {}
    edges = []
    for f in feats:
        a, b = (tuple(x) for x in (f["geometry"]["coordinates"][0], f["geometry"]["coordinates"][-1]))
        for p in (a, b):
            if p not in index:
                index[p] = len(coords)
                coords.append(p)
        props = f["properties"]
        edges.append((index[a], index[b], props["length_m"], props["travel_time_s"]))
        if not props.get("oneway", False):
            edges.append((index[b], index[a], props["length_m"], props["travel_time_s"]))
    nodes = [GeoPoint(lat, lon) for lon, lat in coords]
    graph = NetworkGraph.from_edge_list(nodes, edges)
    origin = index[tuple(cm_node(1, 0))]
    dest = index[tuple(cm_node(1, CM_COLS - 1))]
    ranked = oracles.ranked_path_costs(graph, origin, dest)
    top = ranked[:4]

    landuse, census, pois, elevation = cm_layers()

    def poly(f):
        ring = f["geometry"]["coordinates"][0]
        return Polygon(tuple(GeoPoint(lat, lon) for lon, lat in ring))

    lu = [LandUseZone(poly(f), f["properties"]["category"]) for f in landuse]
    ce = [CensusUnit(poly(f), f["properties"]["population"], f["properties"]["area_km2"]) for f in census]
    po = [PoiRecord(GeoPoint(f["geometry"]["coordinates"][1], f["geometry"]["coordinates"][0]),
                    f["properties"]["category"], f["properties"]["weight"]) for f in pois]
    el = [ElevationSample(GeoPoint(lat, lon), e) for lat, lon, e in elevation]
    rules = StopRules.from_mapping(CM_RULES)
    citywide = oracles.citywide_stops_ref(lu, ce, po, el, rules)

    best_nodes = top[0][1]
    line_pts = []
    for u, v in zip(best_nodes, best_nodes[1:]):
        for p in (nodes[u], nodes[v]):
            if not line_pts or line_pts[-1] != p:
                line_pts.append(p)
    stops = oracles.route_stops_ref(line_pts, citywide, rules)
    return {
        "origin": origin,
        "destination": dest,
        "n_nodes": len(nodes),
        "n_directed_edges": len(edges),
        "n_loopless_paths": len(ranked),
        "candidates": [{"cost": c, "nodes": list(p)} for c, p in top],
        "optimal": {"cost": top[0][0], "nodes": list(best_nodes)},
        "n_citywide": len(citywide),
        "stops": [{"lat": lat, "lon": lon, "chainage_m": round(s, 1)} for lat, lon, s in stops],
    }


def make_reference(d: Path, expected: dict):
    """Existing-line stand-in: model stops nudged ~110 m north plus two extra stations."""
    feats = [point(s["lon"], round(s["lat"] + 0.001, 6), name=f"existing {i + 1}")
             for i, s in enumerate(expected["stops"])]
    # two stations far off the corridor, inserted in along-route order
    feats.insert(3, point(80.135, 12.960, name="existing extra A"))
    feats.insert(10, point(80.240, 12.960, name="existing extra B"))
    dump(d / "reference_stops.geojson", fc(feats))


def main():
    make_small()
    make_gridville()
    make_diamond()
    make_single_path()
    d = make_chennai_mini()
    expected = chennai_expected(d)
    dump(d / "expected.json", expected)
    make_reference(d, expected)
    print(json.dumps({k: v for k, v in expected.items() if k != "stops"}, indent=1)[:1500])
    print("stops:", len(expected["stops"]))
    for s in expected["stops"]:
        print("  ", s)


if __name__ == "__main__":
    main()
