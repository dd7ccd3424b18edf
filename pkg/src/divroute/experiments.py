"""Seeded drivers for the three experiments, with metrics and manifests.

Every run writes ``manifest.json`` (experiment number, seeds, overrides and
the effective configuration) next to its metrics; ``replay`` reruns a
manifest and regenerates identical metrics files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from divroute import __version__
from divroute.config import SimConfig, coerce
from divroute.costmap import save_costmap
from divroute.errors import ConfigError
from divroute.mission import final_route_selection, make_world, route_cost, run_mission
from divroute.planner import (Route, mean_pairwise_dissimilarity,
                              plan_diverse_routes, plan_route_sequence, route_dissimilarity,
                              save_routes, shortest_path)
from divroute.render import render_svg
from divroute.roadmap import Roadmap, save_roadmap
from divroute.scoring import GainSet, edge_terms, score_all

# Exp. 1: one route per gain row, colour order as drawn.
EXP1_GAINS = {"red": (30.0, 10.0, 10.0), "blue": (0.0, 30.0, 0.0), "green": (0.0, 2.0, 5.0)}
EXP1_BASE = {"gamma": 10.0, "sigma_bar_sq": 0.001}
# Exp. 2: (gamma, sigma_bar_sq) per row, shared gains.
EXP2_ROWS = {"low_sd": (100.0, 0.0003), "high_sd": (500.0, 0.00003)}
EXP2_BASE = {"k1": 0.6, "k2": 0.3, "k3": 0.1, "n_vehicles": 3}
EXP3_BASE = {"gamma": 10.0, "sigma_bar_sq": 0.0001, "k1": 0.0, "k2": 1.0, "k3": 0.0,
             "n_vehicles": 3}


@dataclass
class ExperimentSpec:
    experiment: int
    seeds: tuple[int, ...] = (0,)
    overrides: dict = field(default_factory=dict)
    out_dir: Path | None = None
    # Exp. 1 only: penalise each gain row's route against the earlier rows
    exp1_penalize: bool = False
    render: bool = True

    def __post_init__(self):
        if self.experiment not in (1, 2, 3):
            raise ConfigError(f"experiment must be 1, 2 or 3, got {self.experiment}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        self.seeds = tuple(int(s) for s in self.seeds)
        self.overrides = coerce(self.overrides)

    def config(self, base: dict | None = None) -> SimConfig:
        return SimConfig().replace(**(base or {})).replace(**self.overrides)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list[dict]
    summary: dict
    svgs: dict[str, str] = field(default_factory=dict)


def route_terms(route: Route, rm: Roadmap, cmap) -> dict:
    """Length plus accumulated traversability (sum d*mu) and variance (sum d*var) terms."""
    e, d, mu, var = edge_terms(rm, cmap)
    lookup = {(int(i), int(j)): k for k, (i, j) in enumerate(e)}
    idx = [lookup[(min(u, v), max(u, v))] for u, v in zip(route.vertex_sequence, route.vertex_sequence[1:])]
    return {
        "length": math.fsum(d[idx]),
        "mu_cost": math.fsum(d[idx] * mu[idx]),
        "var_cost": math.fsum(d[idx] * var[idx]),
    }


def _exp1(spec: ExperimentSpec):
    cfg = spec.config(EXP1_BASE)
    rows, svgs = [], {}
    for seed in spec.seeds:
        rm, truth, _ = make_world(cfg, seed)
        scored = [score_all(rm, truth, GainSet(*g)) for g in EXP1_GAINS.values()]
        if spec.exp1_penalize:
            routes = plan_route_sequence(scored, cfg.penalty)
        else:
            routes = [shortest_path(s) for s in scored]
        for name, gains, r in zip(EXP1_GAINS, EXP1_GAINS.values(), routes):
            rows.append({"seed": seed, "route": name, "k1": gains[0], "k2": gains[1], "k3": gains[2],
                         **route_terms(r, rm, truth), "edges": r.edge_count,
                         "total_cost": r.total_cost})
        if spec.render:
            svgs[f"exp1_seed{seed}"] = render_svg(rm, truth, routes, title=f"exp1 seed {seed}")
    by_seed = _group(rows)
    red_le_blue = [s["red"]["length"] <= s["blue"]["length"] for s in by_seed.values()]
    green_min = [s["green"]["var_cost"] <= min(r["var_cost"] for r in s.values())
                 for s in by_seed.values()]
    summary = {"red_len_le_blue_frac": float(np.mean(red_le_blue)),
               "green_min_var_frac": float(np.mean(green_min))}
    return rows, summary, svgs


def _exp2(spec: ExperimentSpec):
    cfg = spec.config(EXP2_BASE)
    rows, svgs = [], {}
    for seed in spec.seeds:
        rm, truth, _ = make_world(cfg, seed)
        scored = score_all(rm, truth, cfg.gains)
        for name, (gamma, s2) in EXP2_ROWS.items():
            row_cfg = cfg.replace(gamma=gamma, sigma_bar_sq=s2).replace(**spec.overrides)
            routes = plan_diverse_routes(scored, row_cfg.n_vehicles, row_cfg.penalty)
            pair = {f"d{i + 1}{j + 1}": route_dissimilarity(routes[i], routes[j])
                    for i in range(len(routes)) for j in range(i + 1, len(routes))}
            rows.append({"seed": seed, "row": name, "gamma": row_cfg.gamma,
                         "sigma_bar_sq": row_cfg.sigma_bar_sq, **pair,
                         "mean_dissimilarity": mean_pairwise_dissimilarity(routes),
                         "a1_vertices": " ".join(map(str, routes[0].vertex_sequence))})
            if spec.render:
                svgs[f"exp2_{name}_seed{seed}"] = render_svg(rm, truth, routes,
                                                             title=f"exp2 {name} seed {seed}")
    by_seed = _group(rows, key="row")
    high_gt_low = [s["high_sd"]["mean_dissimilarity"] > s["low_sd"]["mean_dissimilarity"]
                   for s in by_seed.values()]
    both_pos = [min(s["high_sd"]["mean_dissimilarity"], s["low_sd"]["mean_dissimilarity"]) > 0
                for s in by_seed.values()]
    summary = {"high_gt_low_frac": float(np.mean(high_gt_low)),
               "both_positive_frac": float(np.mean(both_pos))}
    return rows, summary, svgs


def _exp3(spec: ExperimentSpec):
    cfg = spec.config(EXP3_BASE)
    rows, svgs = [], {}
    for seed in spec.seeds:
        rm, truth, prior = make_world(cfg, seed)
        res = run_mission(cfg, truth, prior, rm)
        opt = final_route_selection(truth, rm, cfg.gains)
        apr = final_route_selection(prior, rm, cfg.gains)
        post = final_route_selection(res.estimate, rm, cfg.gains)
        c_opt, c_apr, c_post = (route_cost(r, rm, truth, cfg.gains) for r in (opt, apr, post))
        rows.append({"seed": seed, "ticks": res.ticks, "replans": len({t for t, _, _ in res.history}),
                     "surveyed_fraction": float(res.estimate.surveyed.mean()),
                     "cost_true_optimal": c_opt, "cost_apriori": c_apr, "cost_post_mission": c_post,
                     "post_le_apriori": int(c_post <= c_apr),
                     "optimal_le_both": int(c_opt <= c_apr and c_opt <= c_post)})
        if spec.render:
            svgs[f"exp3_traces_seed{seed}"] = render_svg(rm, res.estimate, traces=res.traces,
                                                         title=f"exp3 traces seed {seed}")
            svgs[f"exp3_routes_seed{seed}"] = render_svg(rm, truth, [opt, apr, post],
                                                         dashed=[False, True, True],
                                                         title=f"exp3 routes seed {seed}")
    summary = {"post_le_apriori_frac": float(np.mean([r["post_le_apriori"] for r in rows])),
               "optimal_never_beaten": all(r["optimal_le_both"] for r in rows)}
    return rows, summary, svgs


def _group(rows, key="route"):
    out: dict[int, dict] = {}
    for r in rows:
        out.setdefault(r["seed"], {})[r[key]] = r
    return out


_DRIVERS = {1: _exp1, 2: _exp2, 3: _exp3}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    rows, summary, svgs = _DRIVERS[spec.experiment](spec)
    result = ExperimentResult(spec, rows, summary, svgs)
    if spec.out_dir is not None:
        write_outputs(result, Path(spec.out_dir))
    return result


def run_experiment_1(spec: ExperimentSpec) -> ExperimentResult:
    return run_experiment(spec)


def run_experiment_2(spec: ExperimentSpec) -> ExperimentResult:
    return run_experiment(spec)


def run_experiment_3(spec: ExperimentSpec) -> ExperimentResult:
    return run_experiment(spec)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows({k: repr(v) if isinstance(v, float) else v for k, v in r.items()} for r in rows)
    return buf.getvalue()


def manifest(spec: ExperimentSpec) -> dict:
    base = {1: EXP1_BASE, 2: EXP2_BASE, 3: EXP3_BASE}[spec.experiment]
    return {
        "experiment": spec.experiment,
        "seeds": list(spec.seeds),
        "overrides": spec.overrides,
        "exp1_penalize": spec.exp1_penalize,
        "config": spec.config(base).to_dict(),
        "version": __version__,
    }


def write_outputs(result: ExperimentResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(manifest(result.spec), indent=1, sort_keys=True) + "\n")
    (out / "metrics.csv").write_text(rows_to_csv(result.rows))
    (out / "summary.json").write_text(json.dumps(result.summary, indent=1, sort_keys=True) + "\n")
    for name, svg in result.svgs.items():
        (out / f"{name}.svg").write_text(svg)


def spec_from_manifest(path, out_dir=None) -> ExperimentSpec:
    doc = json.loads(Path(path).read_text())
    return ExperimentSpec(doc["experiment"], tuple(doc["seeds"]), doc["overrides"],
                          out_dir=out_dir, exp1_penalize=doc.get("exp1_penalize", False))


def replay(path, out_dir) -> ExperimentResult:
    return run_experiment(spec_from_manifest(path, out_dir))


# one-shot helpers used by the CLI ---------------------------------------

def plan_once(cfg: SimConfig, seed: int, out: Path | None = None) -> list[Route]:
    """Diverse routes for cfg.n_vehicles on a fresh world, planned on the truth map."""
    rm, truth, _ = make_world(cfg, seed)
    routes = plan_diverse_routes(score_all(rm, truth, cfg.gains), cfg.n_vehicles, cfg.penalty)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        save_roadmap(score_all(rm, truth, cfg.gains), out / "roadmap.json")
        save_costmap(truth, out / "costmap.json")
        save_routes(routes, out / "routes.json")
        (out / "plan.svg").write_text(render_svg(rm, truth, routes))
    return routes


def mission_once(cfg: SimConfig, seed: int, out: Path | None = None):
    rm, truth, prior = make_world(cfg, seed)
    res = run_mission(cfg, truth, prior, rm)
    final = final_route_selection(res.estimate, rm, cfg.gains)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        doc = {"seed": seed, "config": cfg.to_dict(), "version": __version__}
        (out / "manifest.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        (out / "traces.csv").write_text(rows_to_csv(
            [{"tick": t, "vehicle": v, "x": x, "y": y} for t, v, x, y in res.trace_rows]))
        hist = [{"tick": t, "vehicle": v, "route": r.to_dict()} for t, v, r in res.history]
        (out / "route_history.json").write_text(json.dumps(hist, indent=1) + "\n")
        save_routes([final], out / "final_route.json")
        save_costmap(res.estimate, out / "estimate.json")
        save_roadmap(rm, out / "roadmap.json")
        (out / "mission.svg").write_text(render_svg(rm, res.estimate, [final], res.traces,
                                                    colors=["black"]))
    return res, final

