"""Command-line front end.

Usage::

    metroplan plan --config run.toml
    metroplan candidates --manifest city.toml --origin 0 --dest 24 --k 4
    metroplan stops --manifest city.toml --stops.min_density=8000
    metroplan compare --config run.toml --reference existing_stops.geojson
    metroplan validate --manifest city.toml

Settings come from an optional TOML config file; command-line flags win.
``--aco.<name>=<value>`` and ``--stops.<name>=<value>`` override single
engine parameters or stop rules.
"""

from __future__ import annotations

import argparse
import logging
import shutil
import sys
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import geojson
from .aco import AcoEngine, AcoParams, OptimizationResult
from .errors import MetroplanError, ValidationError
from .geo import GeoPoint
from .ingestion import CityDataset, load_city_dataset, load_reference_stops
from .network import NetworkGraph, Route, k_candidate_routes
from .stops import PlacedStop, StopRules, compare_with_reference, place_route_stops, score_candidates

log = logging.getLogger("metroplan")

DEFAULT_SNAP_MAX_M = 2000.0

CANDIDATES_FILE = "candidates.geojson"
OPTIMAL_FILE = "optimal.geojson"
FACTORS_FILE = "factors.json"
STOPS_FILE = "stops.geojson"
FINAL_FILE = "final.geojson"
CITYWIDE_FILE = "citywide_stops.geojson"
COMPARISON_FILE = "comparison.json"


@dataclass
class RunConfig:
    manifest: Path | None = None
    origin: Any = None
    dest: Any = None
    k: int = 4
    out: Path = Path("out")
    seed: int | None = None
    snap_max_m: float = DEFAULT_SNAP_MAX_M
    reference: Path | None = None
    aco: AcoParams = field(default_factory=AcoParams)
    rules: StopRules = field(default_factory=StopRules)


# --- config resolution -----------------------------------------------------------

def _coerce(text: str) -> Any:
    """Parse a flag value as a TOML scalar/array, falling back to a string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _split_overrides(extra: Sequence[str]) -> tuple[dict, dict]:
    aco: dict[str, Any] = {}
    rules: dict[str, Any] = {}
    items = list(extra)
    i = 0
    while i < len(items):
        tok = items[i]
        if not tok.startswith("--") or "." not in tok:
            raise ValidationError(f"unrecognised argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            if i + 1 >= len(items):
                raise ValidationError(f"flag {tok} needs a value")
            i += 1
            value = items[i]
        section, _, name = key.partition(".")
        if section == "aco":
            aco[name] = _coerce(value)
        elif section == "stops":
            rules[name] = _coerce(value)
        else:
            raise ValidationError(f"unknown override section {section!r} in {tok!r}")
        i += 1
    return aco, rules


def _endpoint(value: Any) -> Any:
    if value is None or isinstance(value, (list, tuple)):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, str):
        text = value.strip()
        if "," in text:
            parts = [p.strip() for p in text.split(",")]
            try:
                return [float(parts[0]), float(parts[1])]
            except (ValueError, IndexError):
                raise ValidationError(f"bad coordinate endpoint {value!r}; use 'lat,lon'") from None
        try:
            return int(text)
        except ValueError:
            raise ValidationError(f"bad endpoint {value!r}; use a node id or 'lat,lon'") from None
    raise ValidationError(f"bad endpoint {value!r}")


def build_config(args: argparse.Namespace, extra: Sequence[str]) -> RunConfig:
    """Merge config file values with flags into validated parameter objects."""
    file_cfg: dict[str, Any] = {}
    base = Path.cwd()
    if args.config:
        cfg_path = Path(args.config)
        try:
            file_cfg = tomllib.loads(cfg_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"config file not found: {cfg_path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"{cfg_path}: invalid config: {exc}") from exc
        base = cfg_path.parent
    known = {"manifest", "origin", "dest", "k", "seed", "out", "snap_max_m", "reference", "aco", "stops"}
    unknown = sorted(set(file_cfg) - known)
    if unknown:
        raise ValidationError(f"unknown config key(s): {', '.join(unknown)}")

    def pick(name):
        flag = getattr(args, name, None)
        return flag if flag is not None else file_cfg.get(name)

    def path_of(name):
        flag = getattr(args, name, None)
        if flag is not None:
            return Path(flag)
        value = file_cfg.get(name)
        return None if value is None else base / value

    aco_over, rule_over = _split_overrides(extra)
    aco_values = {**file_cfg.get("aco", {}), **aco_over}
    rule_values = {**file_cfg.get("stops", {}), **rule_over}
    seed = pick("seed")
    if seed is not None:
        aco_values["seed"] = seed

    cfg = RunConfig(
        manifest=path_of("manifest"),
        origin=_endpoint(pick("origin")),
        dest=_endpoint(pick("dest")),
        k=pick("k") if pick("k") is not None else 4,
        out=path_of("out") or Path("out"),
        seed=seed,
        snap_max_m=float(pick("snap_max_m") or DEFAULT_SNAP_MAX_M),
        reference=path_of("reference"),
        aco=AcoParams.from_mapping(aco_values),
        rules=StopRules.from_mapping(rule_values),
    )
    if isinstance(cfg.k, bool) or not isinstance(cfg.k, int) or cfg.k < 1:
        raise ValidationError(f"k must be an integer >= 1, got {cfg.k!r}")
    if cfg.manifest is None:
        raise ValidationError("no dataset manifest given (use --manifest or 'manifest' in the config)")
    return cfg


def resolve_endpoint(graph: NetworkGraph, value: Any, label: str, snap_max_m: float) -> int:
    """Node id as given, or the nearest node to a ``[lat, lon]`` pair."""
    if value is None:
        raise ValidationError(f"{label} endpoint not set")
    if isinstance(value, int):
        graph.check_node(value)
        return value
    point = GeoPoint(lat=value[0], lon=value[1])
    node, dist = graph.nearest_node(point)
    if dist > snap_max_m:
        raise ValidationError(
            f"{label} ({point.lat}, {point.lon}) is {dist:.0f} m from the nearest node; "
            f"snap limit is {snap_max_m:.0f} m"
        )
    return node


# --- output builders -------------------------------------------------------------

def _route_properties(route: Route, aco: AcoParams) -> dict:
    return {
        "nodes": list(route.nodes),
        "total_distance_m": route.total_distance_m,
        "total_time_s": route.total_time_s,
        "cost": route.cost(aco.w_d, aco.w_t),
    }


def candidates_collection(routes: Sequence[Route], aco: AcoParams) -> dict:
    return geojson.feature_collection([
        geojson.line_feature(r.polyline().points, {"rank": i + 1, **_route_properties(r, aco)})
        for i, r in enumerate(routes)
    ])


def optimal_collection(result: OptimizationResult) -> dict:
    r = result.best_route
    return geojson.feature_collection([
        geojson.line_feature(r.polyline().points, {**_route_properties(r, result.params), "seed": result.seed})
    ])


def _stop_feature(placed: PlacedStop, order: int) -> dict:
    return geojson.point_feature(placed.stop.location, {
        "role": "stop",
        "order": order,
        "chainage_m": placed.chainage_m,
        "offset_m": placed.offset_m,
        **placed.stop.to_properties(),
    })


def stops_collection(placed: Sequence[PlacedStop]) -> dict:
    return geojson.feature_collection([_stop_feature(p, i + 1) for i, p in enumerate(placed)])


def final_collection(graph: NetworkGraph, route: Route, placed: Sequence[PlacedStop], aco: AcoParams) -> dict:
    feats = [geojson.line_feature(route.polyline().points, {"role": "route", **_route_properties(route, aco)})]
    feats.append(geojson.point_feature(graph.nodes[route.origin], {"role": "origin", "node": route.origin}))
    feats.extend(_stop_feature(p, i + 1) for i, p in enumerate(placed))
    feats.append(geojson.point_feature(graph.nodes[route.destination],
                                       {"role": "destination", "node": route.destination}))
    return geojson.feature_collection(feats)


def citywide_collection(candidates) -> dict:
    return geojson.feature_collection([
        geojson.point_feature(c.location, {"rank": i + 1, **c.to_properties()}) for i, c in enumerate(candidates)
    ])


# --- pipeline ----------------------------------------------------------------------

@dataclass
class PlanOutputs:
    candidates: list[Route]
    result: OptimizationResult
    placed: list[PlacedStop]


def run_plan(ds: CityDataset, cfg: RunConfig) -> PlanOutputs:
    graph = ds.network
    origin = resolve_endpoint(graph, cfg.origin, "origin", cfg.snap_max_m)
    dest = resolve_endpoint(graph, cfg.dest, "destination", cfg.snap_max_m)
    candidates = k_candidate_routes(graph, origin, dest, cfg.k, cfg.aco.w_d, cfg.aco.w_t)
    result = AcoEngine(graph, cfg.aco, cfg.k).run(origin, dest)
    citywide = score_candidates(ds.landuse, ds.census, ds.pois, ds.elevation, cfg.rules)
    placed = place_route_stops(result.best_route, citywide, cfg.rules)
    log.info("best cost %s, %d intermediate stops", result.best_cost, len(placed))
    return PlanOutputs(candidates, result, placed)


def plan_documents(ds: CityDataset, cfg: RunConfig, out: PlanOutputs) -> dict[str, Any]:
    return {
        CANDIDATES_FILE: candidates_collection(out.candidates, cfg.aco),
        OPTIMAL_FILE: optimal_collection(out.result),
        FACTORS_FILE: out.result.to_dict(),
        STOPS_FILE: stops_collection(out.placed),
        FINAL_FILE: final_collection(ds.network, out.result.best_route, out.placed, cfg.aco),
    }


def write_outputs(out_dir: Path, documents: dict[str, Any]) -> list[Path]:
    """Write all documents or none: stage in a temp dir, then move into place."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    with tempfile.TemporaryDirectory(dir=out_dir, prefix=".staging-") as tmp:
        for name, doc in documents.items():
            geojson.write_json(Path(tmp) / name, doc)
        try:
            for name in documents:
                target = out_dir / name
                shutil.move(str(Path(tmp) / name), target)
                written.append(target)
        except OSError:
            for p in written:
                p.unlink(missing_ok=True)
            raise
    return written


def cmd_plan(cfg: RunConfig) -> list[Path]:
    ds = load_city_dataset(cfg.manifest)
    out = run_plan(ds, cfg)
    return write_outputs(cfg.out, plan_documents(ds, cfg, out))


def cmd_candidates(cfg: RunConfig) -> list[Path]:
    ds = load_city_dataset(cfg.manifest)
    graph = ds.network
    origin = resolve_endpoint(graph, cfg.origin, "origin", cfg.snap_max_m)
    dest = resolve_endpoint(graph, cfg.dest, "destination", cfg.snap_max_m)
    routes = k_candidate_routes(graph, origin, dest, cfg.k, cfg.aco.w_d, cfg.aco.w_t)
    return write_outputs(cfg.out, {CANDIDATES_FILE: candidates_collection(routes, cfg.aco)})


def cmd_stops(cfg: RunConfig) -> list[Path]:
    ds = load_city_dataset(cfg.manifest)
    citywide = score_candidates(ds.landuse, ds.census, ds.pois, ds.elevation, cfg.rules)
    return write_outputs(cfg.out, {CITYWIDE_FILE: citywide_collection(citywide)})


def cmd_compare(cfg: RunConfig) -> list[Path]:
    if cfg.reference is None:
        raise ValidationError("compare needs a reference stops file (--reference)")
    reference = load_reference_stops(cfg.reference)
    ds = load_city_dataset(cfg.manifest)
    out = run_plan(ds, cfg)
    report = compare_with_reference([p.stop for p in out.placed], reference, cfg.rules.corridor_radius_m)
    docs = plan_documents(ds, cfg, out)
    docs[COMPARISON_FILE] = report.to_dict()
    return write_outputs(cfg.out, docs)


def cmd_validate(cfg: RunConfig) -> list[Path]:
    ds = load_city_dataset(cfg.manifest)
    for line in ds.report.lines():
        print(line)
    print(f"graph: {ds.network.n_nodes} nodes, {len(ds.network.edges)} directed edges, "
          f"{len(set(ds.network.components))} component(s)")
    return []


COMMANDS = {
    "plan": cmd_plan,
    "candidates": cmd_candidates,
    "stops": cmd_stops,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metroplan", description="Offline transit corridor planning.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "plan": "candidate routes, ACO optimal route, stops and final network",
        "candidates": "k candidate routes only",
        "stops": "citywide candidate stops only",
        "compare": "plan, then compare stops against a reference list",
        "validate": "load the dataset and print the load report",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="TOML run config")
        p.add_argument("--manifest", help="dataset manifest (TOML)")
        p.add_argument("--origin", help="node id or 'lat,lon'")
        p.add_argument("--dest", help="node id or 'lat,lon'")
        p.add_argument("--k", type=int, help="number of candidate routes (default 4)")
        p.add_argument("--seed", type=int, help="RNG seed")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--snap-max-m", dest="snap_max_m", type=float, help="coordinate snap limit in meters")
        if name == "compare":
            p.add_argument("--reference", help="reference stops (GeoJSON points in route order)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args, extra)
        written = COMMANDS[args.command](cfg)
    except (MetroplanError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in written:
        print(p)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
