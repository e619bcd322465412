"""Offline transit corridor planning toolkit."""

from .aco import AcoEngine, AcoParams, OptimizationResult, optimize, route_cost
from .errors import (
    DataLoadError,
    MetroplanError,
    NoPathError,
    OptimizationFailedError,
    ParseError,
    ValidationError,
)
from .geo import GeoPoint, Polygon, Polyline, distance_point_to_polyline, haversine_distance, point_in_polygon
from .ingestion import CityDataset, load_city_dataset, stub_provider
from .network import Edge, NetworkGraph, Route, k_candidate_routes, load_network, shortest_path
from .stops import (
    CandidateStop,
    CensusUnit,
    ElevationSample,
    LandUseZone,
    PoiRecord,
    StopRules,
    compare_with_reference,
    score_candidates,
    select_route_stops,
)

__version__ = "0.1.0"
