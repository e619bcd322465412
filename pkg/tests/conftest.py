from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from metroplan.geo import GeoPoint  # noqa: E402
from metroplan.ingestion import load_city_dataset  # noqa: E402
from metroplan.network import NetworkGraph, load_network  # noqa: E402

DATA = Path(__file__).parent / "data"


def diamond_graph() -> NetworkGraph:
    """0 -> 1 -> 3 is short but slow (arm A); 0 -> 2 -> 3 is long but fast (arm B)."""
    nodes = [GeoPoint(13.0, 80.2), GeoPoint(13.01, 80.21), GeoPoint(12.99, 80.21), GeoPoint(13.0, 80.22)]
    return NetworkGraph.from_edge_list(nodes, [
        (0, 1, 1000.0, 300.0), (0, 2, 1500.0, 100.0),
        (1, 3, 1000.0, 300.0), (2, 3, 1500.0, 100.0),
    ])


ARM_A = (0, 1, 3)
ARM_B = (0, 2, 3)


def single_path_graph() -> NetworkGraph:
    nodes = [GeoPoint(13.0, 80.2 + 0.01 * i) for i in range(4)]
    return NetworkGraph.from_edge_list(nodes, [
        (0, 1, 1000.0, 70.0), (1, 2, 1100.0, 75.0), (2, 3, 1200.0, 80.0),
    ])


def grid_graph(n: int = 5, length: float = 1000.0, time: float = 60.0) -> NetworkGraph:
    """n x n lattice, node id = row * n + col, edges both ways."""
    nodes = [GeoPoint(13.0 + 0.009 * r, 80.2 + 0.009 * c) for r in range(n) for c in range(n)]
    edges = []
    for r in range(n):
        for c in range(n):
            u = r * n + c
            for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < n and 0 <= cc < n:
                    edges.append((u, rr * n + cc, length, time))
    return NetworkGraph.from_edge_list(nodes, edges)


def trap_graph() -> NetworkGraph:
    """0 branches to 1 (trap) or 2 -> 3 (destination).

    From 1 the only successor is 4, whose only successor is the visited
    origin, so an ant entering 1 is abandoned. Edge 0 -> 1 costs 1100 and
    0 -> 2 costs 2200 at unit weights.
    """
    nodes = [GeoPoint(13.0, 80.2), GeoPoint(13.01, 80.21), GeoPoint(12.99, 80.21),
             GeoPoint(13.0, 80.22), GeoPoint(13.02, 80.22)]
    return NetworkGraph.from_edge_list(nodes, [
        (0, 1, 1000.0, 100.0), (0, 2, 2000.0, 200.0), (1, 4, 1000.0, 100.0),
        (2, 3, 1000.0, 100.0), (4, 0, 1000.0, 100.0),
    ])


@pytest.fixture
def diamond() -> NetworkGraph:
    return diamond_graph()


@pytest.fixture
def single_path() -> NetworkGraph:
    return single_path_graph()


@pytest.fixture(scope="session")
def gridville() -> NetworkGraph:
    return load_network(DATA / "gridville" / "network.geojson")


@pytest.fixture(scope="session")
def gridville_dataset():
    return load_city_dataset(DATA / "gridville" / "manifest.toml")
