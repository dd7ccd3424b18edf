"""Multi-vehicle survey mission.

Vehicles follow their assigned routes at constant speed, survey every
subcell their path touches, and share a single estimated costmap. Every
``replan_period`` ticks the whole diverse route set is recomputed from the
vehicles' current positions against the updated estimate.

A vehicle that is part-way along an edge when replanning is attached to the
roadmap through a temporary vertex splitting that edge; the two halves get
the edge's cost in proportion to their length, so a replan with no new
information reproduces the remainder of the previous route.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from divroute.config import SimConfig
from divroute.costmap import SurveyReport, TwoValueCostmap, generate_truth
from divroute.errors import StepBudgetExceeded
from divroute.geometry import Point, lerp
from divroute.planner import Route, plan_route_sequence, shortest_path
from divroute.roadmap import Roadmap, build_roadmap
from divroute.scoring import GainSet, score_all

_SNAP = 1e-9


@dataclass(frozen=True, eq=False)
class VehicleState:
    id: int
    position: Point
    route: Route | None = None
    progress: int = 1  # index into route.points of the next waypoint
    trace: tuple[Point, ...] = ()
    # roadmap edge under a temporary start vertex, when the route begins mid-edge
    anchor_edge: tuple[int, int] | None = None

    @property
    def done(self) -> bool:
        return (self.route is not None and self.progress >= len(self.route.points)
                and self.position == self.route.points[-1])


@dataclass
class MissionResult:
    vehicles: list[VehicleState]
    estimate: TwoValueCostmap
    apriori: TwoValueCostmap
    roadmap: Roadmap
    history: list[tuple[int, int, Route]] = field(default_factory=list)
    trace_rows: list[tuple[int, int, float, float]] = field(default_factory=list)
    ticks: int = 0

    @property
    def traces(self) -> list[tuple[Point, ...]]:
        return [v.trace for v in self.vehicles]


def make_world(cfg: SimConfig, seed: int) -> tuple[Roadmap, TwoValueCostmap, TwoValueCostmap]:
    """Roadmap, truth map and a-priori estimate from independent child seeds."""
    s_road, s_truth, s_prior = np.random.SeedSequence(seed).spawn(3)
    rm = build_roadmap(cfg.bounds, cfg.n_generators, np.random.default_rng(s_road),
                       cfg.start, cfg.goal, cfg.k_connect)

    def draw(ss):
        m = generate_truth(np.random.default_rng(ss), cfg.n_cells, cfg.n_subcells,
                           (cfg.mean_low, cfg.mean_high), cfg.var_scale, cfg.cell_size)
        m.seed = seed
        return m

    return rm, draw(s_truth), draw(s_prior)


def _attach(rm: Roadmap, v: VehicleState) -> tuple[Roadmap, tuple[int, int] | None]:
    """Roadmap whose start vertex is the vehicle's current position."""
    if v.route is None:
        return rm, None
    n = rm.n_vertices
    prev_pt = v.route.points[v.progress - 1]
    a, b = v.route.vertex_sequence[v.progress - 1], v.route.vertex_sequence[v.progress]
    if a < n and v.position == prev_pt:
        return dataclasses.replace(rm, start_vertex=a), None
    u, w = (a, b) if a < n else v.anchor_edge
    p = v.position
    pu, pw = rm.point(u), rm.point(w)
    if p.dist(pw) <= _SNAP:
        return dataclasses.replace(rm, start_vertex=w), None
    if p.dist(pu) <= _SNAP:
        return dataclasses.replace(rm, start_vertex=u), None
    frac = p.dist(pu) / pu.dist(pw)
    c = rm.edge_costs[u, w]
    verts = np.vstack([rm.vertices, [p.x, p.y]])
    adj = np.zeros((n + 1, n + 1), dtype=bool)
    adj[:n, :n] = rm.adjacency
    cost = np.zeros((n + 1, n + 1))
    cost[:n, :n] = rm.edge_costs
    adj[n, [u, w]] = adj[[u, w], n] = True
    cost[n, u] = cost[u, n] = c * frac
    cost[n, w] = cost[w, n] = c * (1 - frac)
    out = dataclasses.replace(rm, vertices=verts, adjacency=adj, edge_costs=cost, start_vertex=n)
    return out, (u, w)


def assign_routes(rm: Roadmap, estimate: TwoValueCostmap, cfg: SimConfig,
                  vehicles: list[VehicleState]) -> list[VehicleState]:
    """Sequential diverse planning for every unfinished vehicle, in id order."""
    scored = score_all(rm, estimate, cfg.gains)
    active = [v for v in vehicles if not v.done]
    attached = [_attach(scored, v) for v in active]
    routes = plan_route_sequence([a for a, _ in attached], cfg.penalty)
    updated = {v.id: dataclasses.replace(v, route=r, progress=1, anchor_edge=anchor)
               for v, (_, anchor), r in zip(active, attached, routes)}
    return [updated.get(v.id, v) for v in vehicles]


def step_vehicle(v: VehicleState, step_length: float, truth: TwoValueCostmap,
                 estimate: TwoValueCostmap | None = None,
                 mode: str = "incremental") -> tuple[VehicleState, list[SurveyReport]]:
    """Advance `v` by `step_length` along its route and survey what it crossed.

    Reports carry truth values. They are applied to `estimate` only when one
    is given; the mission loop applies them itself in vehicle order.
    """
    if v.done or v.route is None:
        return v, []
    pts = v.route.points
    pos, idx, remaining = v.position, v.progress, step_length
    path = [pos]
    while remaining > 0 and idx < len(pts):
        target = pts[idx]
        gap = pos.dist(target)
        if gap <= remaining:
            pos, remaining, idx = target, remaining - gap, idx + 1
        else:
            pos, remaining = lerp(pos, target, remaining / gap), 0.0
        path.append(pos)

    reports, seen = [], set()
    for a, b in zip(path, path[1:]):
        for cell, k in truth.subcells_touched(a, b):
            if (cell, k) not in seen:
                seen.add((cell, k))
                reports.append(SurveyReport(cell, k, float(truth.subcells[cell[0], cell[1], k])))
    if estimate is not None:
        for r in reports:
            estimate.apply_survey(r, mode)
    new = dataclasses.replace(v, position=pos, progress=idx, trace=v.trace + tuple(path[1:]))
    return new, reports


def run_mission(cfg: SimConfig, truth: TwoValueCostmap, apriori: TwoValueCostmap,
                rm: Roadmap) -> MissionResult:
    """Assign, advance, survey and replan until every vehicle reaches the goal."""
    estimate = apriori.copy()
    start = rm.point(rm.start_vertex)
    vehicles = [VehicleState(i, start, trace=(start,)) for i in range(cfg.n_vehicles)]
    result = MissionResult(vehicles, estimate, apriori, rm)
    result.trace_rows.extend((0, v.id, start.x, start.y) for v in vehicles)
    tick = 0
    while not all(v.done for v in vehicles):
        vehicles = assign_routes(rm, estimate, cfg, vehicles)
        result.history.extend((tick, v.id, v.route) for v in vehicles if not v.done)
        for _ in range(cfg.replan_period):
            stepped = [step_vehicle(v, cfg.step_length, truth) for v in vehicles]
            vehicles = [s for s, _ in stepped]
            for _, reports in stepped:
                for r in reports:
                    estimate.apply_survey(r, cfg.variance_mode)
            tick += 1
            result.trace_rows.extend((tick, v.id, v.position.x, v.position.y) for v in vehicles)
            if all(v.done for v in vehicles):
                break
            if tick >= cfg.step_budget:
                raise StepBudgetExceeded(f"mission exceeded {cfg.step_budget} steps")
    result.vehicles = vehicles
    result.ticks = tick
    return result


def final_route_selection(estimate: TwoValueCostmap, rm: Roadmap, gains: GainSet) -> Route:
    """Unpenalised best route start->goal under `estimate`."""
    return shortest_path(score_all(rm, estimate, gains))


def route_cost(route: Route, rm: Roadmap, cmap: TwoValueCostmap, gains: GainSet) -> float:
    """Cost of an existing route re-scored against `cmap`."""
    scored = score_all(rm, cmap, gains).edge_costs
    seq = route.vertex_sequence
    return math.fsum(scored[u, v] for u, v in zip(seq, seq[1:]))
