"""Edge scores from costmap statistics.

Each edge is scored from the cell statistics at three points (1/6, 1/2 and
5/6 of its length) instead of a line integral:

    cost = d * (k1 + k2 * mean_avg + k3 * var_avg)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from divroute.costmap import TwoValueCostmap
from divroute.errors import ConfigError, DegenerateEdgeError
from divroute.geometry import Point, lerp
from divroute.roadmap import Roadmap

SAMPLE_FRACTIONS = (1 / 6, 1 / 2, 5 / 6)


@dataclass(frozen=True)
class GainSet:
    """Weights on distance (k1), traversability (k2) and uncertainty (k3)."""

    k1: float = 1.0
    k2: float = 0.0
    k3: float = 0.0

    def __post_init__(self):
        ks = (self.k1, self.k2, self.k3)
        if not all(math.isfinite(k) and k >= 0 for k in ks):
            raise ConfigError(f"gains must be finite and nonnegative, got {ks}")
        if not any(ks):
            raise ConfigError("at least one gain must be positive")

    def scaled(self, lam: float) -> "GainSet":
        return GainSet(self.k1 * lam, self.k2 * lam, self.k3 * lam)


@dataclass(frozen=True)
class EdgeScore:
    length: float
    mu_avg: float
    var_avg: float
    cost: float


def sample_points(a, b) -> tuple[Point, Point, Point]:
    a, b = Point(*a), Point(*b)
    if a == b:
        raise DegenerateEdgeError(f"zero-length edge at {a}")
    return tuple(lerp(a, b, t) for t in SAMPLE_FRACTIONS)


def score_edge(a, b, cmap: TwoValueCostmap, gains: GainSet) -> EdgeScore:
    pts = sample_points(a, b)
    stats = [cmap.cell_stats(p) for p in pts]
    mu_avg = sum(m for m, _ in stats) / 3
    var_avg = sum(v for _, v in stats) / 3
    d = Point(*a).dist(Point(*b))
    return EdgeScore(d, mu_avg, var_avg, d * (gains.k1 + gains.k2 * mu_avg + gains.k3 * var_avg))


def edge_terms(rm: Roadmap, cmap: TwoValueCostmap) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised (edges, length, mu_avg, var_avg) for every roadmap edge."""
    e = rm.edges()
    a = rm.vertices[e[:, 0]]
    b = rm.vertices[e[:, 1]]
    d = np.linalg.norm(b - a, axis=1)
    if np.any(d == 0):
        raise DegenerateEdgeError("roadmap contains a zero-length edge")
    mu = np.zeros(len(e))
    var = np.zeros(len(e))
    for t in SAMPLE_FRACTIONS:
        p = a + t * (b - a)
        m, v = cmap.stats_at(p[:, 0], p[:, 1])
        mu += m
        var += v
    return e, d, mu / 3, var / 3


def score_all(rm: Roadmap, cmap: TwoValueCostmap, gains: GainSet) -> Roadmap:
    """Copy of `rm` whose edge costs are the scores against `cmap`."""
    e, d, mu, var = edge_terms(rm, cmap)
    c = d * (gains.k1 + gains.k2 * mu + gains.k3 * var)
    cost = np.zeros_like(rm.edge_costs)
    cost[e[:, 0], e[:, 1]] = c
    cost[e[:, 1], e[:, 0]] = c
    return rm.with_costs(cost)
