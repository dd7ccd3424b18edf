"""Shortest paths and spatially diverse route sets.

Diversity comes from penalising edge costs near routes already committed:
each committed edge midpoint adds a Gaussian bump

    gamma / sqrt(2 pi s2) * exp(-d**2 / (2 s2))

to every edge, where d is the distance between midpoints. Route k is
planned on the base costs plus the bumps of routes 1..k-1.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from divroute.errors import ConfigError, NoPathError
from divroute.geometry import Point
from divroute.roadmap import Roadmap


@dataclass(frozen=True)
class PenaltyParams:
    """Gaussian penalty settings.

    ``distance_normalizer`` divides midpoint distances before they enter the
    kernel (the control variances of interest are only meaningful on a unit
    scale); set it to 1.0 for raw meters. ``exponent="verbatim"`` divides
    the squared distance by ``2*sqrt(s2)`` instead of ``2*s2``.
    """

    gamma: float = 0.0
    sigma_bar_sq: float = 1e-3
    distance_normalizer: float = 2000.0
    exponent: Literal["standard", "verbatim"] = "standard"

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ConfigError("gamma must be finite and >= 0")
        if not (math.isfinite(self.sigma_bar_sq) and self.sigma_bar_sq > 0):
            raise ConfigError("sigma_bar_sq must be finite and > 0")
        if not self.distance_normalizer > 0:
            raise ConfigError("distance_normalizer must be > 0")
        if self.exponent not in ("standard", "verbatim"):
            raise ConfigError(f"unknown exponent mode {self.exponent!r}")

    def kernel(self, dist):
        d = np.asarray(dist, dtype=float) / self.distance_normalizer
        denom = 2 * self.sigma_bar_sq if self.exponent == "standard" else 2 * math.sqrt(self.sigma_bar_sq)
        return self.gamma / math.sqrt(2 * math.pi * self.sigma_bar_sq) * np.exp(-d * d / denom)


@dataclass(frozen=True, eq=False)
class Route:
    """A start-to-end path with its per-edge cost breakdown.

    ``edge_costs`` are the costs the route was planned under (base plus
    penalty); ``base_costs`` and ``penalties`` split them.
    """

    vertex_sequence: tuple[int, ...]
    points: tuple[Point, ...]
    base_costs: tuple[float, ...]
    penalties: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.penalties:
            object.__setattr__(self, "penalties", (0.0,) * len(self.base_costs))

    @property
    def edge_costs(self) -> tuple[float, ...]:
        return tuple(b + p for b, p in zip(self.base_costs, self.penalties))

    @property
    def edge_count(self) -> int:
        return len(self.vertex_sequence) - 1

    @property
    def total_cost(self) -> float:
        return math.fsum(self.edge_costs)

    @property
    def base_total_cost(self) -> float:
        return math.fsum(self.base_costs)

    @property
    def total_length(self) -> float:
        return math.fsum(a.dist(b) for a, b in zip(self.points, self.points[1:]))

    @property
    def edge_midpoints(self) -> tuple[Point, ...]:
        return tuple(Point(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
                     for a, b in zip(self.points, self.points[1:]))

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertex_sequence),
            "waypoints": [[p.x, p.y] for p in self.points],
            "edges": [{"base_cost": b, "penalty": p, "cost": b + p}
                      for b, p in zip(self.base_costs, self.penalties)],
            "total_cost": self.total_cost,
            "base_total_cost": self.base_total_cost,
            "total_length": self.total_length,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Route":
        return cls(tuple(doc["vertices"]), tuple(Point(*p) for p in doc["waypoints"]),
                   tuple(e["base_cost"] for e in doc["edges"]),
                   tuple(e["penalty"] for e in doc["edges"]))


def save_routes(routes: Sequence[Route], path) -> None:
    Path(path).write_text(json.dumps([r.to_dict() for r in routes], indent=1) + "\n")


def load_routes(path) -> list[Route]:
    return [Route.from_dict(d) for d in json.loads(Path(path).read_text())]


def _dijkstra(adj_lists, cost: np.ndarray, src: int, dst: int) -> tuple[int, ...]:
    # Labels are (cost, vertex sequence); comparing tuples gives the
    # lexicographically smallest sequence among equal-cost paths.
    best: dict[int, tuple[float, tuple[int, ...]]] = {src: (0.0, (src,))}
    heap = [(0.0, (src,))]
    done = set()
    while heap:
        d, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dst:
            return path
        for v in adj_lists[u]:
            if v in done:
                continue
            label = (d + cost[u, v], path + (v,))
            if v not in best or label < best[v]:
                best[v] = label
                heapq.heappush(heap, label)
    raise NoPathError(f"vertex {dst} unreachable from {src}")


def _route_from_path(rm: Roadmap, path: Sequence[int], base: np.ndarray,
                     penalty: np.ndarray | None = None) -> Route:
    pairs = list(zip(path, path[1:]))
    return Route(
        vertex_sequence=tuple(int(v) for v in path),
        points=tuple(rm.point(v) for v in path),
        base_costs=tuple(float(base[u, v]) for u, v in pairs),
        penalties=tuple(float(penalty[u, v]) for u, v in pairs) if penalty is not None else (),
    )


def _search(rm: Roadmap, costs: np.ndarray) -> tuple[int, ...]:
    if rm.start_vertex is None or rm.end_vertex is None:
        raise ConfigError("roadmap has no start/end vertex")
    active = costs[rm.adjacency]
    if np.any(~np.isfinite(active)) or np.any(active <= 0):
        raise ConfigError("edge costs must be finite and strictly positive")
    adj_lists = [np.flatnonzero(row).tolist() for row in rm.adjacency]
    return _dijkstra(adj_lists, costs, rm.start_vertex, rm.end_vertex)


def shortest_path(rm: Roadmap) -> Route:
    """Minimum-cost start-to-end route on ``rm.edge_costs``."""
    path = _search(rm, rm.edge_costs)
    return _route_from_path(rm, path, rm.edge_costs)


def penalty_at(params: PenaltyParams, edge_mid, route_mid) -> float:
    return float(params.kernel(math.hypot(edge_mid[0] - route_mid[0], edge_mid[1] - route_mid[1])))


def penalty_matrix(rm: Roadmap, committed: Sequence[Route], params: PenaltyParams) -> np.ndarray:
    """Summed penalty for every edge from all midpoints of the committed routes."""
    out = np.zeros_like(rm.edge_costs)
    mids = [m for r in committed for m in r.edge_midpoints]
    if not mids or params.gamma == 0:
        return out
    e = rm.edges()
    em = 0.5 * (rm.vertices[e[:, 0]] + rm.vertices[e[:, 1]])
    cm = np.asarray(mids, dtype=float)
    d = np.linalg.norm(em[:, None, :] - cm[None, :, :], axis=2)
    pen = params.kernel(d).sum(axis=1)
    out[e[:, 0], e[:, 1]] = pen
    out[e[:, 1], e[:, 0]] = pen
    return out


def penalize_costs(rm: Roadmap, committed: Sequence[Route], params: PenaltyParams) -> Roadmap:
    """Copy of `rm` with the committed routes' penalties added to its costs."""
    return rm.with_costs(rm.edge_costs + penalty_matrix(rm, committed, params))


def plan_route_sequence(roadmaps: Sequence[Roadmap], params: PenaltyParams) -> list[Route]:
    """One route per roadmap, each penalised against the routes before it.

    The roadmaps may differ in start vertex or in base costs (different gains);
    penalties are geometric so they carry across.
    """
    routes: list[Route] = []
    for rm in roadmaps:
        pen = penalty_matrix(rm, routes, params)
        path = _search(rm, rm.edge_costs + pen)
        routes.append(_route_from_path(rm, path, rm.edge_costs, pen))
    return routes


def plan_diverse_routes(rm: Roadmap, n_routes: int, params: PenaltyParams) -> list[Route]:
    if n_routes < 1:
        raise ConfigError("n_routes must be >= 1")
    return plan_route_sequence([rm] * n_routes, params)


def route_dissimilarity(r1: Route, r2: Route) -> float:
    """Symmetric mean nearest-midpoint distance between two routes, meters."""
    a = np.asarray(r1.edge_midpoints, dtype=float)
    b = np.asarray(r2.edge_midpoints, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise ConfigError("routes must have at least one edge")
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return 0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean())


def mean_pairwise_dissimilarity(routes: Sequence[Route]) -> float:
    pairs = [(i, j) for i in range(len(routes)) for j in range(i + 1, len(routes))]
    if not pairs:
        return 0.0
    return float(np.mean([route_dissimilarity(routes[i], routes[j]) for i, j in pairs]))
