"""Simulation configuration and the flat ``key = value`` file format."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from divroute.errors import ConfigError
from divroute.geometry import Bounds, Point
from divroute.planner import PenaltyParams
from divroute.scoring import GainSet

_SECTION = "sim"


@dataclass(frozen=True)
class SimConfig:
    # map and endpoints
    map_width: float = 2000.0
    map_height: float = 2000.0
    start_x: float = 200.0
    start_y: float = 1800.0
    goal_x: float = 1700.0
    goal_y: float = 600.0
    # costmap
    n_cells: int = 20
    n_subcells: int = 9
    mean_low: float = 2.0
    mean_high: float = 8.0
    var_scale: float = 1.0
    variance_mode: str = "incremental"
    # roadmap
    n_generators: int = 100
    k_connect: int = 3
    # scoring and penalty
    k1: float = 0.6
    k2: float = 0.3
    k3: float = 0.1
    gamma: float = 100.0
    sigma_bar_sq: float = 0.0003
    distance_normalizer: float = 0.0  # 0 -> max map dimension
    penalty_distance: str = "normalized"
    penalty_exponent: str = "standard"
    # mission
    n_vehicles: int = 3
    step_length: float = 10.0
    replan_period: int = 20
    step_budget: int = 20000

    def __post_init__(self):
        if self.map_width != self.map_height:
            raise ConfigError("the costmap grid is square; map_width must equal map_height")
        self.bounds  # validates
        if self.start == self.goal:
            raise ConfigError("start and goal must differ")
        for p in (self.start, self.goal):
            if not self.bounds.contains(p):
                raise ConfigError(f"{p} outside map bounds")
        if self.variance_mode not in ("incremental", "exact"):
            raise ConfigError(f"variance_mode must be incremental|exact, got {self.variance_mode!r}")
        if self.penalty_distance not in ("normalized", "raw"):
            raise ConfigError(f"penalty_distance must be normalized|raw, got {self.penalty_distance!r}")
        if self.step_length <= 0 or self.replan_period < 1 or self.step_budget < 1:
            raise ConfigError("step_length, replan_period and step_budget must be positive")
        if self.n_vehicles < 1:
            raise ConfigError("n_vehicles must be >= 1")
        self.gains
        self.penalty

    @property
    def bounds(self) -> Bounds:
        return Bounds(0.0, 0.0, self.map_width, self.map_height)

    @property
    def start(self) -> Point:
        return Point(self.start_x, self.start_y)

    @property
    def goal(self) -> Point:
        return Point(self.goal_x, self.goal_y)

    @property
    def cell_size(self) -> float:
        return self.map_width / self.n_cells

    @property
    def gains(self) -> GainSet:
        return GainSet(self.k1, self.k2, self.k3)

    @property
    def penalty(self) -> PenaltyParams:
        if self.penalty_distance == "raw":
            norm = 1.0
        else:
            norm = self.distance_normalizer or max(self.map_width, self.map_height)
        return PenaltyParams(self.gamma, self.sigma_bar_sq, norm, self.penalty_exponent)

    def replace(self, **kw) -> "SimConfig":
        return dataclasses.replace(self, **coerce(kw))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def coerce(raw: dict) -> dict:
    """Convert string values to the field types of SimConfig."""
    types = {f.name: f.type for f in fields(SimConfig)}
    out = {}
    for key, val in raw.items():
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        typ = types[key]
        try:
            if typ == "int":
                out[key] = int(val)
            elif typ == "float":
                out[key] = float(val)
            else:
                out[key] = str(val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return out


def parse_config(text: str) -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return coerce(dict(cp[_SECTION]))


def load_config(path, base: SimConfig | None = None) -> SimConfig:
    base = base or SimConfig()
    return dataclasses.replace(base, **parse_config(Path(path).read_text()))


def dump_config(cfg: SimConfig) -> str:
    return "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n"
                   for k, v in cfg.to_dict().items())
