"""Voronoi roadmap: generators, construction, pruning and endpoint insertion.

The roadmap is stored as dense matrices (vertex positions, a symmetric 0/1
adjacency with zero diagonal, and a symmetric cost matrix), which is cheap
at the few-hundred-vertex scale used here and maps directly onto the
adjacency/cost matrix formulation of the planner.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.spatial import Voronoi, cKDTree

from divroute.errors import ConfigError, ConstructionError
from divroute.geometry import Bounds, Point

MERGE_TOL = 1e-7


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    points: np.ndarray
    seed: int | None = None

    @property
    def count(self) -> int:
        return len(self.points)


def place_generators(bounds: Bounds, count: int, rng) -> GeneratorSet:
    """Sample `count` distinct generators uniformly inside `bounds`.

    `rng` is a numpy Generator or an integer seed.
    """
    if count < 1:
        raise ConfigError(f"generator count must be positive, got {count}")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    gen = _as_rng(rng)
    lo = np.array([bounds.xmin, bounds.ymin])
    span = np.array([bounds.width, bounds.height])
    pts = lo + gen.random((count, 2)) * span
    # Collisions are astronomically unlikely; redraw rather than assume.
    while len(np.unique(pts, axis=0)) < count:
        _, first = np.unique(pts, axis=0, return_index=True)
        dup = np.setdiff1d(np.arange(count), first)
        pts[dup] = lo + gen.random((len(dup), 2)) * span
    return GeneratorSet(points=pts, seed=seed)


@dataclass(frozen=True, eq=False)
class Roadmap:
    """Waypoint graph over the map rectangle.

    ``adjacency[i, j]`` is True iff an undirected edge joins vertices i and j;
    ``edge_costs[i, j]`` is only meaningful where adjacency holds.
    ``generators`` and ``cells`` are kept from construction for inspection
    (cells are convex polygons clipped to the bounds, one per generator).
    """

    vertices: np.ndarray
    adjacency: np.ndarray
    edge_costs: np.ndarray
    bounds: Bounds
    start_vertex: int | None = None
    end_vertex: int | None = None
    generators: np.ndarray | None = None
    cells: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        a = np.array(self.adjacency, dtype=bool)
        c = np.array(self.edge_costs, dtype=float)
        n = len(v)
        if a.shape != (n, n) or c.shape != (n, n):
            raise ConstructionError("adjacency/cost shape does not match vertex count")
        if not np.array_equal(a, a.T) or a.diagonal().any():
            raise ConstructionError("adjacency must be symmetric with zero diagonal")
        for arr in (v, a, c):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "adjacency", a)
        object.__setattr__(self, "edge_costs", c)

    @classmethod
    def from_edges(cls, vertices, edges: Iterable[Sequence[int]], bounds: Bounds,
                   costs: Sequence[float] | None = None, **kw) -> "Roadmap":
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        n = len(v)
        adj = np.zeros((n, n), dtype=bool)
        cost = np.zeros((n, n))
        for k, (i, j) in enumerate(edges):
            if i == j:
                continue
            w = float(np.linalg.norm(v[i] - v[j])) if costs is None else float(costs[k])
            adj[i, j] = adj[j, i] = True
            cost[i, j] = cost[j, i] = w
        return cls(v, adj, cost, bounds, **kw)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def point(self, i: int) -> Point:
        return Point(float(self.vertices[i, 0]), float(self.vertices[i, 1]))

    def edges(self) -> np.ndarray:
        """Edge list (E, 2) with i < j, in row-major order."""
        return np.argwhere(np.triu(self.adjacency, k=1))

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def edge_lengths(self) -> np.ndarray:
        e = self.edges()
        return np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)

    def with_costs(self, costs: np.ndarray) -> "Roadmap":
        costs = np.where(self.adjacency, costs, 0.0)
        return replace(self, edge_costs=costs)

    def reachable(self, src: int, dst: int) -> bool:
        order = breadth_first_order(csr_matrix(self.adjacency), src,
                                    directed=False, return_predecessors=False)
        return dst in set(order.tolist())

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "bounds": [self.bounds.xmin, self.bounds.ymin, self.bounds.xmax, self.bounds.ymax],
            "start_vertex": self.start_vertex,
            "end_vertex": self.end_vertex,
            "vertices": [[i, float(x), float(y)] for i, (x, y) in enumerate(self.vertices)],
            "edges": [[int(i), int(j), float(self.edge_costs[i, j])] for i, j in self.edges()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Roadmap":
        verts = [(x, y) for _, x, y in sorted(doc["vertices"])]
        edges = [(i, j) for i, j, _ in doc["edges"]]
        costs = [c for _, _, c in doc["edges"]]
        return cls.from_edges(verts, edges, Bounds(*doc["bounds"]), costs=costs,
                              start_vertex=doc["start_vertex"], end_vertex=doc["end_vertex"])


def save_roadmap(rm: Roadmap, path) -> None:
    Path(path).write_text(json.dumps(rm.to_dict(), indent=1) + "\n")


def load_roadmap(path) -> Roadmap:
    return Roadmap.from_dict(json.loads(Path(path).read_text()))


def _mirrored(points: np.ndarray, b: Bounds) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    return np.vstack([
        points,
        np.column_stack([2 * b.xmin - x, y]),
        np.column_stack([2 * b.xmax - x, y]),
        np.column_stack([x, 2 * b.ymin - y]),
        np.column_stack([x, 2 * b.ymax - y]),
    ])


def _convex_order(poly: np.ndarray) -> np.ndarray:
    c = poly.mean(axis=0)
    ang = np.arctan2(poly[:, 1] - c[1], poly[:, 0] - c[0])
    return poly[np.argsort(ang, kind="stable")]


def build_voronoi_roadmap(gens: GeneratorSet, bounds: Bounds) -> Roadmap:
    """Voronoi edges of `gens` clipped to `bounds`, as an unpruned roadmap.

    Clipping uses the reflection construction: mirroring every generator
    across the four sides makes each original cell bounded and equal to its
    unbounded cell intersected with the rectangle. Ridges between an original
    and a mirror lie on the rectangle boundary and are kept as edges.
    """
    pts = np.asarray(gens.points, dtype=float)
    n = len(pts)
    if n < 4:
        raise ConstructionError(f"need at least 4 generators, got {n}")
    if not all(bounds.contains(p) for p in pts):
        raise ConstructionError("generator outside map bounds")
    if len(np.unique(pts, axis=0)) < n:
        raise ConstructionError("generators must be pairwise distinct")
    centered = pts - pts.mean(axis=0)
    scale = max(bounds.width, bounds.height)
    if np.linalg.matrix_rank(centered, tol=1e-9 * scale * math.sqrt(n)) < 2:
        raise ConstructionError("generators are collinear")

    vor = Voronoi(_mirrored(pts, bounds))
    lo = np.array([bounds.xmin, bounds.ymin])
    hi = np.array([bounds.xmax, bounds.ymax])
    raw_v = np.clip(vor.vertices, lo, hi)

    ridges = []
    for (p, q), rv in zip(vor.ridge_points, vor.ridge_vertices):
        if min(p, q) >= n or -1 in rv:
            continue
        ridges.append((rv[0], rv[1]))
    used = np.unique(np.array(ridges).ravel())
    # canonical lexicographic vertex order keeps output independent of Qhull numbering
    order = used[np.lexsort((raw_v[used, 1], raw_v[used, 0]))]
    remap = {int(old): k for k, old in enumerate(order)}
    verts = raw_v[order]
    edges = sorted({(min(remap[a], remap[b]), max(remap[a], remap[b])) for a, b in ridges})

    cells = []
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        cells.append(_convex_order(raw_v[[r for r in region if r >= 0]]))
    rm = Roadmap.from_edges(verts, edges, bounds)
    return replace(rm, generators=pts.copy(), cells=tuple(cells))


def prune_edges(rm: Roadmap, tol: float = MERGE_TOL) -> Roadmap:
    """Remove superfluous structure from a roadmap.

    Coincident vertices (closer than `tol`) are merged, which removes
    zero-length edges and turns the resulting parallel edges into one.
    Then only the largest connected component is kept, and degree-1
    vertices other than start/end are stripped repeatedly until none remain.
    Edge costs of the result are Euclidean lengths.
    """
    n = rm.n_vertices
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(cKDTree(rm.vertices).query_pairs(tol)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    rep = np.array([find(i) for i in range(n)])

    edges = {(min(rep[i], rep[j]), max(rep[i], rep[j])) for i, j in rm.edges()}
    edges = {e for e in edges if e[0] != e[1]}
    protected = {rep[v] for v in (rm.start_vertex, rm.end_vertex) if v is not None}

    adj = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        adj[i, j] = adj[j, i] = True
    alive = np.zeros(n, dtype=bool)
    alive[np.unique(rep)] = True
    alive &= adj.any(axis=1) | np.isin(np.arange(n), list(protected))
    if not adj.any():
        raise ConstructionError("roadmap has no edges")

    ncomp, labels = connected_components(csr_matrix(adj), directed=False)
    sizes = np.bincount(labels[alive], minlength=ncomp)
    keep_label = int(np.argmax(sizes))  # ties -> lowest label, i.e. lowest vertex
    alive &= labels == keep_label
    adj &= alive[:, None] & alive[None, :]

    while True:
        deg = adj.sum(axis=1)
        spur = alive & (deg <= 1)
        for v in protected:
            spur[v] = False
        if not spur.any():
            break
        alive &= ~spur
        adj[spur, :] = False
        adj[:, spur] = False

    if any(not alive[v] for v in protected):
        raise ConstructionError("pruning disconnected the start or end vertex")
    if not adj.any():
        raise ConstructionError("pruning removed every edge")

    keep = np.flatnonzero(alive)
    new_index = -np.ones(n, dtype=int)
    new_index[keep] = np.arange(len(keep))
    sub = adj[np.ix_(keep, keep)]
    verts = rm.vertices[keep]
    cost = np.where(sub, np.linalg.norm(verts[:, None, :] - verts[None, :, :], axis=2), 0.0)

    def _map(v):
        return None if v is None else int(new_index[rep[v]])

    return replace(rm, vertices=verts, adjacency=sub, edge_costs=cost,
                   start_vertex=_map(rm.start_vertex), end_vertex=_map(rm.end_vertex))


def nearest_vertices(vertices: np.ndarray, p, k: int) -> np.ndarray:
    """Indices of the k nearest vertices, ties broken by lower index."""
    d = np.hypot(vertices[:, 0] - p[0], vertices[:, 1] - p[1])
    return np.lexsort((np.arange(len(d)), d))[:k]


def insert_endpoints(rm: Roadmap, start, goal, k_connect: int = 3,
                     tol: float = 1e-9) -> Roadmap:
    """Add start and goal as vertices joined to their k nearest roadmap vertices.

    An endpoint within `tol` of an existing vertex is merged with it instead.
    Connector costs are Euclidean lengths.
    """
    if k_connect < 1:
        raise ConfigError("k_connect must be positive")
    start, goal = Point(*map(float, start)), Point(*map(float, goal))
    for p in (start, goal):
        if not rm.bounds.contains(p):
            raise ConfigError(f"endpoint {p} outside map bounds")
    base = rm.vertices
    n = len(base)
    verts = [base]
    new_edges: list[tuple[int, int]] = []
    ids = []
    for p in (start, goal):
        near = nearest_vertices(base, p, k_connect)
        if np.hypot(*(base[near[0]] - p)) <= tol:
            ids.append(int(near[0]))
            continue
        idx = n + len(verts) - 1
        verts.append(np.array([[p.x, p.y]]))
        new_edges.extend((idx, int(j)) for j in near)
        ids.append(idx)
    if ids[0] == ids[1]:
        raise ConfigError("start and goal resolve to the same vertex")

    v = np.vstack(verts)
    m = len(v)
    adj = np.zeros((m, m), dtype=bool)
    adj[:n, :n] = rm.adjacency
    cost = np.zeros((m, m))
    cost[:n, :n] = rm.edge_costs
    for i, j in new_edges:
        adj[i, j] = adj[j, i] = True
        cost[i, j] = cost[j, i] = float(np.linalg.norm(v[i] - v[j]))
    out = replace(rm, vertices=v, adjacency=adj, edge_costs=cost,
                  start_vertex=ids[0], end_vertex=ids[1])
    if not out.reachable(ids[0], ids[1]):
        raise ConstructionError("no path from start to goal after endpoint insertion")
    return out


def build_roadmap(bounds: Bounds, n_generators: int, rng, start, goal,
                  k_connect: int = 3) -> Roadmap:
    """Generators -> Voronoi roadmap -> pruned -> endpoints inserted."""
    gens = place_generators(bounds, n_generators, rng)
    rm = prune_edges(build_voronoi_roadmap(gens, bounds))
    return insert_endpoints(rm, start, goal, k_connect)
