"""Basic planar geometry shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from divroute.errors import ConfigError


class Point(NamedTuple):
    """Position in the map frame, meters."""

    x: float
    y: float

    def dist(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned map rectangle."""

    xmin: float = 0.0
    ymin: float = 0.0
    xmax: float = 2000.0
    ymax: float = 2000.0

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"non-finite bounds {vals}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ConfigError(f"degenerate bounds {vals}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def contains(self, p, tol: float = 0.0) -> bool:
        x, y = p
        return (self.xmin - tol <= x <= self.xmax + tol
                and self.ymin - tol <= y <= self.ymax + tol)


def lerp(a: Point, b: Point, t: float) -> Point:
    return Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))


def midpoint(a: Point, b: Point) -> Point:
    return Point(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
