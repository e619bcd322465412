"""Ant colony route optimiser with bounded pheromones and elitist deposit.

Ants walk from origin to destination choosing outgoing edges with
probability proportional to ``tau**alpha * eta**beta`` where ``eta`` is the
inverse of the edge's weighted distance/time cost. After each iteration all
trails evaporate, the iteration-best and best-so-far routes each deposit
``q / cost`` on their edges, and every trail is clamped to
``[tau_min, tau_max]``. Ants that reach a node with no unvisited successor
are abandoned.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Sequence

from .errors import MetroplanError, OptimizationFailedError, ValidationError
from .network import Edge, NetworkGraph, Route, check_weights, k_candidate_routes

_MASK64 = (1 << 64) - 1


class DeadEndError(MetroplanError):
    """The ant has no unvisited successor."""


@dataclass(frozen=True)
class AcoParams:
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.1
    q: float = 1.0
    n_ants: int = 20
    n_iterations: int = 200
    w_d: float = 1.0
    w_t: float = 1.0
    tau_min: float = 0.01
    tau_max: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        def real(name):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{name} must be a finite number, got {v!r}")
            return v

        def count(name):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValidationError(f"{name} must be an integer >= 1, got {v!r}")

        if real("alpha") < 0:
            raise ValidationError("alpha must be >= 0")
        if real("beta") < 0:
            raise ValidationError("beta must be >= 0")
        if not 0 < real("rho") < 1:
            raise ValidationError("rho must lie in (0, 1)")
        if real("q") <= 0:
            raise ValidationError("q must be > 0")
        count("n_ants")
        count("n_iterations")
        check_weights(real("w_d"), real("w_t"))
        if not 0 < real("tau_min") <= real("tau_max"):
            raise ValidationError("pheromone bounds must satisfy 0 < tau_min <= tau_max")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValidationError(f"seed must be an integer, got {self.seed!r}")

    @classmethod
    def from_mapping(cls, values: dict[str, Any], base: "AcoParams | None" = None) -> "AcoParams":
        """Override ``base`` (or the defaults) with known keys from ``values``."""
        base = base or cls()
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ValidationError(f"unknown ACO parameter(s): {', '.join(unknown)}")
        return replace(base, **values)


class PheromoneMatrix:
    """One trail value per directed edge, indexed by ``Edge.index``."""

    __slots__ = ("values", "tau_min", "tau_max")

    def __init__(self, values: Sequence[float], tau_min: float, tau_max: float):
        self.values = list(values)
        self.tau_min = tau_min
        self.tau_max = tau_max

    @classmethod
    def uniform(cls, n_edges: int, value: float, tau_min: float, tau_max: float) -> "PheromoneMatrix":
        return cls([value] * n_edges, tau_min, tau_max)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, edge_index: int) -> float:
        return self.values[edge_index]

    def in_bounds(self) -> bool:
        lo, hi = self.tau_min, self.tau_max
        return all(lo <= v <= hi and math.isfinite(v) for v in self.values)


def route_cost(route: Route, w_d: float, w_t: float) -> float:
    return w_d * route.total_distance_m + w_t * route.total_time_s


def transition_probabilities(graph: NetworkGraph, pheromone: PheromoneMatrix, current: int,
                             visited: set[int] | frozenset[int], params: AcoParams) -> list[tuple[Edge, float]]:
    """Distribution over feasible outgoing edges of ``current``.

    Computed in log space so large exponents cannot overflow.
    """
    feasible = [e for e in graph.out_edges(current) if e.target not in visited]
    if not feasible:
        raise DeadEndError(f"node {current} has no unvisited successor")
    if len(feasible) == 1:
        return [(feasible[0], 1.0)]
    alpha, beta, w_d, w_t = params.alpha, params.beta, params.w_d, params.w_t
    tau = pheromone.values
    logs = [alpha * math.log(tau[e.index]) - beta * math.log(w_d * e.length_m + w_t * e.travel_time_s)
            for e in feasible]
    top = max(logs)
    weights = [math.exp(x - top) for x in logs]
    total = math.fsum(weights)
    return [(e, w / total) for e, w in zip(feasible, weights)]


def _sample(dist: list[tuple[Edge, float]], rng: random.Random) -> Edge:
    r = rng.random()
    acc = 0.0
    for e, p in dist:
        acc += p
        if r < acc:
            return e
    return dist[-1][0]


def construct_ant_solution(graph: NetworkGraph, pheromone: PheromoneMatrix, origin: int, dest: int,
                           params: AcoParams, rng: random.Random) -> Route | None:
    """One ant tour; ``None`` when the ant dead-ends."""
    if origin == dest:
        raise ValidationError("origin and destination must differ")
    nodes = [origin]
    edges: list[Edge] = []
    visited = {origin}
    current = origin
    while current != dest:
        try:
            dist = transition_probabilities(graph, pheromone, current, visited, params)
        except DeadEndError:
            return None
        e = _sample(dist, rng)
        edges.append(e)
        current = e.target
        nodes.append(current)
        visited.add(current)
    return Route(tuple(nodes), tuple(edges))


def update_pheromones(pheromone: PheromoneMatrix, solutions: Sequence[Route], best_so_far: Route | None,
                      params: AcoParams) -> PheromoneMatrix:
    """Evaporate, deposit on iteration-best and best-so-far, clamp.

    With no completed solutions in the iteration only evaporation and
    clamping happen.
    """
    keep = 1.0 - params.rho
    values = [keep * v for v in pheromone.values]
    if solutions:
        iteration_best = _first_min(solutions, params)
        for elite in (iteration_best, best_so_far):
            if elite is None:
                continue
            amount = params.q / route_cost(elite, params.w_d, params.w_t)
            for e in elite.edges:
                values[e.index] += amount
    lo, hi = params.tau_min, params.tau_max
    values = [lo if v < lo else hi if v > hi else v for v in values]
    return PheromoneMatrix(values, lo, hi)


def _first_min(routes: Sequence[Route], params: AcoParams) -> Route:
    best = routes[0]
    best_cost = route_cost(best, params.w_d, params.w_t)
    for r in routes[1:]:
        c = route_cost(r, params.w_d, params.w_t)
        if c < best_cost:
            best, best_cost = r, c
    return best


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def ant_rng(seed: int, iteration: int, ant: int) -> random.Random:
    """Independent stream per (seed, iteration, ant), schedule independent."""
    x = _splitmix64(seed & _MASK64)
    x = _splitmix64(x ^ (iteration & _MASK64))
    x = _splitmix64(x ^ (ant & _MASK64))
    return random.Random(x)


# --- results -------------------------------------------------------------------

@dataclass(frozen=True)
class FactorReport:
    total_distance_m: float
    total_time_s: float
    w_d: float
    w_t: float
    distance_cost: float
    time_cost: float


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    best_so_far_cost: float | None
    iteration_best_cost: float | None


@dataclass(frozen=True)
class CandidateCost:
    rank: int
    nodes: tuple[int, ...]
    total_distance_m: float
    total_time_s: float
    cost: float


@dataclass(frozen=True)
class OptimizationResult:
    best_route: Route
    best_cost: float
    factor_report: FactorReport
    per_iteration: tuple[IterationRecord, ...]
    candidate_comparison: tuple[CandidateCost, ...]
    seed: int
    params: AcoParams
    ants_launched: int
    ants_completed: int

    @property
    def ants_abandoned(self) -> int:
        return self.ants_launched - self.ants_completed

    def to_dict(self) -> dict[str, Any]:
        """JSON factor report; field names are part of the output contract."""
        r = self.best_route
        return {
            "origin": r.origin,
            "destination": r.destination,
            "seed": self.seed,
            "params": asdict(self.params),
            "best_route": {
                "nodes": list(r.nodes),
                "total_distance_m": r.total_distance_m,
                "total_time_s": r.total_time_s,
            },
            "best_cost": self.best_cost,
            "factors": asdict(self.factor_report),
            "ants": {
                "launched": self.ants_launched,
                "completed": self.ants_completed,
                "abandoned": self.ants_abandoned,
            },
            "candidate_comparison": [
                {
                    "rank": c.rank,
                    "nodes": list(c.nodes),
                    "total_distance_m": c.total_distance_m,
                    "total_time_s": c.total_time_s,
                    "cost": c.cost,
                    "matches_best": c.nodes == r.nodes,
                }
                for c in self.candidate_comparison
            ],
            "per_iteration": [asdict(rec) for rec in self.per_iteration],
        }


@dataclass
class AcoEngine:
    """Single-use optimiser. Not safe for concurrent ``run`` calls.

    With ``check_invariants`` every transition distribution and every
    post-update pheromone matrix is verified and counted.
    """

    graph: NetworkGraph
    params: AcoParams = field(default_factory=AcoParams)
    k_candidates: int = 4
    check_invariants: bool = False
    transitions_checked: int = 0
    updates_checked: int = 0

    def _checked_transition(self, pheromone, current, visited, params):
        dist = transition_probabilities(self.graph, pheromone, current, visited, params)
        total = math.fsum(p for _, p in dist)
        if abs(total - 1.0) > 1e-9 or any(not 0.0 <= p <= 1.0 for _, p in dist):
            raise AssertionError(f"transition distribution at node {current} sums to {total}")
        self.transitions_checked += 1
        return dist

    def _construct(self, pheromone, origin, dest, rng) -> Route | None:
        if not self.check_invariants:
            return construct_ant_solution(self.graph, pheromone, origin, dest, self.params, rng)
        nodes, edges, visited, current = [origin], [], {origin}, origin
        while current != dest:
            try:
                dist = self._checked_transition(pheromone, current, visited, self.params)
            except DeadEndError:
                return None
            e = _sample(dist, rng)
            edges.append(e)
            current = e.target
            nodes.append(current)
            visited.add(current)
        return Route(tuple(nodes), tuple(edges))

    def run(self, origin: int, dest: int) -> OptimizationResult:
        graph, params = self.graph, self.params
        w_d, w_t = params.w_d, params.w_t
        # Also validates endpoints and raises NoPathError when disconnected.
        candidates = k_candidate_routes(graph, origin, dest, self.k_candidates, w_d, w_t)

        pheromone = PheromoneMatrix.uniform(len(graph.edges), params.tau_max, params.tau_min, params.tau_max)
        best: Route | None = None
        best_cost = math.inf
        trace: list[IterationRecord] = []
        launched = completed = 0

        for it in range(params.n_iterations):
            solutions: list[Route] = []
            for ant in range(params.n_ants):
                launched += 1
                route = self._construct(pheromone, origin, dest, ant_rng(params.seed, it, ant))
                if route is not None:
                    solutions.append(route)
            completed += len(solutions)
            it_cost = None
            if solutions:
                it_best = _first_min(solutions, params)
                it_cost = route_cost(it_best, w_d, w_t)
                if it_cost < best_cost:
                    best, best_cost = it_best, it_cost
            pheromone = update_pheromones(pheromone, solutions, best, params)
            if self.check_invariants:
                if not pheromone.in_bounds():
                    raise AssertionError(f"pheromone left [tau_min, tau_max] at iteration {it}")
                self.updates_checked += 1
            trace.append(IterationRecord(it, None if best is None else best_cost, it_cost))

        if best is None:
            raise OptimizationFailedError(
                f"no ant completed a route from {origin} to {dest}: "
                f"{launched} launched, {launched} abandoned",
                launched=launched, abandoned=launched,
            )
        factors = FactorReport(
            total_distance_m=best.total_distance_m,
            total_time_s=best.total_time_s,
            w_d=w_d,
            w_t=w_t,
            distance_cost=w_d * best.total_distance_m,
            time_cost=w_t * best.total_time_s,
        )
        comparison = tuple(
            CandidateCost(i + 1, c.nodes, c.total_distance_m, c.total_time_s, route_cost(c, w_d, w_t))
            for i, c in enumerate(candidates)
        )
        return OptimizationResult(
            best_route=best,
            best_cost=best_cost,
            factor_report=factors,
            per_iteration=tuple(trace),
            candidate_comparison=comparison,
            seed=params.seed,
            params=params,
            ants_launched=launched,
            ants_completed=completed,
        )


def optimize(graph: NetworkGraph, origin: int, dest: int, params: AcoParams | None = None,
             k_candidates: int = 4) -> OptimizationResult:
    """Run one seeded optimisation and return the best route with its trace."""
    return AcoEngine(graph, params or AcoParams(), k_candidates).run(origin, dest)
