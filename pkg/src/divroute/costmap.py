"""Two-value (mean, variance) costmaps built from per-cell subcell values.

Cell ``(row, col)`` covers ``x in [col*cs, (col+1)*cs)`` and
``y in [row*cs, (row+1)*cs)`` for cell size ``cs``; the map origin is (0, 0).
Each cell is tiled by ``r x r`` subcells (``r = sqrt(n_subcells)``), numbered
row-major from the cell's lower-left corner. Every lookup uses half-open
intervals, so a point on an interior gridline belongs to the higher index;
points on the outer upper edge are clamped into the last cell.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np

from divroute.errors import ConfigError, DomainError

UpdateMode = Literal["incremental", "exact"]


class SurveyReport(NamedTuple):
    cell: tuple[int, int]
    subcell: int
    value: float


class TwoValueCostmap:
    """Grid of cells with subcell values and derived mean/variance matrices.

    ``mean`` and ``var`` are kept as separate state rather than being
    recomputed on demand: in incremental mode they follow the running update
    and can drift from the exact subcell statistics.
    """

    def __init__(self, subcells: np.ndarray, cell_size: float, seed: int | None = None,
                 mean: np.ndarray | None = None, var: np.ndarray | None = None,
                 surveyed: np.ndarray | None = None):
        subcells = np.array(subcells, dtype=float)
        if subcells.ndim != 3 or subcells.shape[0] != subcells.shape[1]:
            raise ConfigError(f"subcells must have shape (Nc, Nc, Ns), got {subcells.shape}")
        ns = subcells.shape[2]
        r = math.isqrt(ns)
        if r * r != ns:
            raise ConfigError(f"subcell count must be a perfect square, got {ns}")
        if not cell_size > 0:
            raise ConfigError("cell_size must be positive")
        self.subcells = subcells
        self.cell_size = float(cell_size)
        self.seed = seed
        m, v = exact_stats(subcells)
        self.mean = m if mean is None else np.array(mean, dtype=float)
        self.var = v if var is None else np.array(var, dtype=float)
        self.surveyed = (np.zeros(subcells.shape, dtype=bool) if surveyed is None
                         else np.array(surveyed, dtype=bool))

    @property
    def n_cells(self) -> int:
        return self.subcells.shape[0]

    @property
    def n_subcells(self) -> int:
        return self.subcells.shape[2]

    @property
    def side(self) -> int:
        """Subcells per cell side."""
        return math.isqrt(self.n_subcells)

    @property
    def extent(self) -> float:
        return self.n_cells * self.cell_size

    def copy(self) -> "TwoValueCostmap":
        return TwoValueCostmap(self.subcells, self.cell_size, self.seed,
                               self.mean, self.var, self.surveyed)

    # lookups -------------------------------------------------------------

    def _subcell_coords(self, x, y):
        """Global subcell grid indices (clamped) for arrays of coordinates."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ext = self.extent
        if np.any(~np.isfinite(x)) or np.any(~np.isfinite(y)) or \
                np.any((x < 0) | (x > ext) | (y < 0) | (y > ext)):
            raise DomainError("point outside costmap bounds")
        g = self.n_cells * self.side
        k = self.side / self.cell_size
        gi = np.minimum(np.floor(x * k).astype(int), g - 1)
        gj = np.minimum(np.floor(y * k).astype(int), g - 1)
        return gi, gj

    def cell_index(self, x, y):
        """(row, col) arrays of the cells containing the given points."""
        gi, gj = self._subcell_coords(x, y)
        return gj // self.side, gi // self.side

    def cell_stats(self, p) -> tuple[float, float]:
        row, col = self.cell_index(p[0], p[1])
        return float(self.mean[row, col]), float(self.var[row, col])

    def stats_at(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised cell_stats over coordinate arrays."""
        row, col = self.cell_index(x, y)
        return self.mean[row, col], self.var[row, col]

    def locate_subcell(self, p) -> tuple[tuple[int, int], int]:
        gi, gj = self._subcell_coords(p[0], p[1])
        return self._split(int(gi), int(gj))

    def _split(self, gi: int, gj: int) -> tuple[tuple[int, int], int]:
        r = self.side
        return (gj // r, gi // r), (gj % r) * r + (gi % r)

    def subcell_bounds(self, cell: tuple[int, int], k: int) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of a subcell."""
        r = self.side
        s = self.cell_size / r
        row, col = cell
        x0 = col * self.cell_size + (k % r) * s
        y0 = row * self.cell_size + (k // r) * s
        return x0, y0, x0 + s, y0 + s

    def subcells_touched(self, a, b) -> list[tuple[tuple[int, int], int]]:
        """Subcells sharing at least one point with segment a-b, in travel order."""
        self._subcell_coords([a[0], b[0]], [a[1], b[1]])
        k = self.side / self.cell_size
        g = self.n_cells * self.side
        u0, v0 = a[0] * k, a[1] * k
        du, dv = b[0] * k - u0, b[1] * k - v0

        # event parameter -> forced integer grid coordinate on the crossed axis
        events: list[tuple[float, int | None, int | None]] = [(0.0, None, None), (1.0, None, None)]
        for start, delta, axis in ((u0, du, 0), (v0, dv, 1)):
            if delta == 0:
                continue
            lo, hi = sorted((start, start + delta))
            for line in range(math.ceil(lo), math.floor(hi) + 1):
                t = (line - start) / delta
                if 0.0 <= t <= 1.0:
                    events.append((t, line, None) if axis == 0 else (t, None, line))
        events.sort(key=lambda e: e[0])

        samples: list[tuple[float, int, int]] = []

        def add(t, fi=None, fj=None):
            gi = fi if fi is not None else math.floor(u0 + t * du)
            gj = fj if fj is not None else math.floor(v0 + t * dv)
            samples.append((t, min(max(gi, 0), g - 1), min(max(gj, 0), g - 1)))

        prev = None
        for t, fi, fj in events:
            if prev is not None and t > prev:
                add(0.5 * (prev + t))
            add(t, fi, fj)
            prev = t

        out, seen = [], set()
        for _, gi, gj in samples:
            if (gi, gj) not in seen:
                seen.add((gi, gj))
                out.append(self._split(gi, gj))
        return out

    # updates -------------------------------------------------------------

    def apply_survey(self, report: SurveyReport, mode: UpdateMode = "incremental") -> None:
        """Overwrite one subcell estimate and update the cell statistics in place."""
        row, col = report.cell
        k = report.subcell
        ns = self.n_subcells
        if not (0 <= row < self.n_cells and 0 <= col < self.n_cells and 0 <= k < ns):
            raise DomainError(f"survey target out of range: {report}")
        new = float(report.value)
        if not math.isfinite(new):
            raise DomainError("observed value must be finite")
        old = float(self.subcells[row, col, k])
        self.subcells[row, col, k] = new
        self.surveyed[row, col, k] = True
        if mode == "exact":
            s = self.subcells[row, col]
            mu = s.mean()
            self.mean[row, col] = mu
            self.var[row, col] = ((s - mu) ** 2).mean()
        elif mode == "incremental":
            mu_old = self.mean[row, col]
            mu_new = mu_old + (new - old) / ns
            var_new = self.var[row, col] + ((new - mu_new) ** 2 - (old - mu_old) ** 2) / ns
            self.mean[row, col] = mu_new
            self.var[row, col] = max(var_new, 0.0)
        else:
            raise ConfigError(f"unknown update mode {mode!r}")

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_cells": self.n_cells,
            "n_subcells": self.n_subcells,
            "cell_size": self.cell_size,
            "seed": self.seed,
            "subcells": self.subcells.tolist(),
            "mean": self.mean.tolist(),
            "var": self.var.tolist(),
            "surveyed": self.surveyed.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TwoValueCostmap":
        sub = np.array(doc["subcells"], dtype=float)
        if sub.shape != (doc["n_cells"], doc["n_cells"], doc["n_subcells"]):
            raise ConfigError("costmap header does not match subcell data")
        return cls(sub, doc["cell_size"], doc["seed"], doc["mean"], doc["var"],
                   np.array(doc["surveyed"], dtype=bool))


def exact_stats(subcells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Population mean and variance over the last axis."""
    mu = subcells.mean(axis=-1)
    var = ((subcells - mu[..., None]) ** 2).mean(axis=-1)
    return mu, var


def apply_survey(cmap: TwoValueCostmap, report: SurveyReport,
                 mode: UpdateMode = "incremental") -> TwoValueCostmap:
    cmap.apply_survey(report, mode)
    return cmap


def cell_stats(cmap: TwoValueCostmap, p) -> tuple[float, float]:
    return cmap.cell_stats(p)


def subcells_touched(cmap: TwoValueCostmap, a, b):
    return cmap.subcells_touched(a, b)


def generate_truth(rng, n_cells: int = 20, n_subcells: int = 9,
                   mean_range: tuple[float, float] = (2.0, 8.0), var_scale: float = 1.0,
                   cell_size: float = 100.0) -> TwoValueCostmap:
    """Synthetic terrain.

    Per cell: target mean ~ U(low, high), target variance = max(0, var_scale * N(0, 1)),
    subcells i.i.d. N(target mean, target variance). The stored mean/variance
    are the exact statistics of the drawn subcells.
    """
    low, high = mean_range
    if not low < high:
        raise ConfigError(f"invalid mean range {mean_range}")
    if var_scale < 0:
        raise ConfigError("var_scale must be nonnegative")
    if n_cells < 1:
        raise ConfigError("n_cells must be positive")
    r = math.isqrt(n_subcells)
    if n_subcells < 1 or r * r != n_subcells:
        raise ConfigError(f"subcell count must be a perfect square, got {n_subcells}")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    target_mean = gen.uniform(low, high, (n_cells, n_cells))
    target_var = np.maximum(var_scale * gen.standard_normal((n_cells, n_cells)), 0.0)
    noise = gen.standard_normal((n_cells, n_cells, n_subcells))
    sub = target_mean[..., None] + np.sqrt(target_var)[..., None] * noise
    return TwoValueCostmap(sub, cell_size, seed)


def save_costmap(cmap: TwoValueCostmap, path) -> None:
    Path(path).write_text(json.dumps(cmap.to_dict()) + "\n")


def load_costmap(path) -> TwoValueCostmap:
    return TwoValueCostmap.from_dict(json.loads(Path(path).read_text()))
