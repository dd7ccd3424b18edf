"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (the lines are
printed regardless of ``-s``).
"""

import itertools
import time

import numpy as np
import pytest

from divroute.config import SimConfig
from divroute.costmap import SurveyReport, TwoValueCostmap, exact_stats, generate_truth
from divroute.experiments import ExperimentSpec, replay, run_experiment
from divroute.geometry import Bounds
from divroute.mission import make_world
from divroute.planner import PenaltyParams, plan_diverse_routes, shortest_path
from divroute.roadmap import Roadmap, build_voronoi_roadmap, place_generators
from divroute.scoring import GainSet, score_all

B = Bounds()


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, elapsed):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail} ({elapsed:.2f}s)")
    return emit


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c01_gamma_zero_identity(report):
    cfg = SimConfig()
    params = PenaltyParams(0.0, cfg.sigma_bar_sq, 2000.0)

    def run():
        same = []
        for seed in range(20):
            rm, truth, _ = make_world(cfg, seed)
            routes = plan_diverse_routes(score_all(rm, truth, cfg.gains), 3, params)
            same.append(all(r.vertex_sequence == routes[0].vertex_sequence
                            and r.points == routes[0].points
                            and r.total_cost == routes[0].total_cost for r in routes))
        return same

    same, dt = _timed(run)
    ok = all(same) and dt < 10
    report(1, ok, f"gamma=0 gives identical routes on {sum(same)}/20 seeds", dt)
    assert ok


def test_c02_mean_update_exact(report):
    def run():
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(1000):
            truth = rng.uniform(0, 10, 9)
            prior = rng.uniform(0, 10, 9)
            m = TwoValueCostmap(prior.reshape(1, 1, 9).copy(), 100.0)
            for k in rng.integers(0, 9, rng.integers(1, 30)):
                m.apply_survey(SurveyReport((0, 0), int(k), truth[k]), "incremental")
            worst = max(worst, abs(m.mean[0, 0] - m.subcells[0, 0].mean()))
        return worst

    worst, dt = _timed(run)
    ok = worst <= 1e-9 and dt < 5
    report(2, ok, f"max |incremental - exact| mean over 1000 sequences = {worst:.2e}", dt)
    assert ok


def test_c03_full_survey_convergence(report):
    def run():
        rng = np.random.default_rng(3)
        truth = generate_truth(rng, 20, 9)
        prior = generate_truth(rng, 20, 9)
        mu_true, var_true = exact_stats(truth.subcells)
        out = {}
        for mode in ("exact", "incremental"):
            est = prior.copy()
            for r, c in itertools.product(range(20), range(20)):
                for k in rng.permutation(9):
                    est.apply_survey(SurveyReport((r, c), int(k), truth.subcells[r, c, k]), mode)
            out[mode] = (np.abs(est.mean - mu_true).max(), np.abs(est.var - var_true).max(),
                         np.abs(est.var - var_true).mean())
        return out

    out, dt = _timed(run)
    mu_err, var_err, _ = out["exact"]
    ok = mu_err <= 1e-9 and var_err <= 1e-9
    i_mu, i_max, i_mean = out["incremental"]
    report(3, ok, f"exact mode max err mean {mu_err:.1e} var {var_err:.1e}; "
                  f"incremental variance discrepancy max {i_max:.3f} mean {i_mean:.3f} "
                  f"(mean err {i_mu:.1e}, reported only)", dt)
    assert ok


def _enumerate_best(rm):
    n, C = rm.n_vertices, rm.edge_costs
    best = None

    def dfs(path, cost):
        nonlocal best
        u = path[-1]
        if u == rm.end_vertex:
            if best is None or cost < best:
                best = cost
            return
        for v in range(n):
            if rm.adjacency[u, v] and v not in path:
                dfs(path + [v], cost + C[u, v])

    dfs([rm.start_vertex], 0)
    return best


def test_c04_shortest_path_oracle(report):
    def run():
        rng = np.random.default_rng(4)
        checked = agree = 0
        while checked < 200:
            n = int(rng.integers(2, 11))
            verts = rng.random((n, 2)) * 2000
            edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.45]
            costs = [float(rng.integers(1, 50)) for _ in edges]
            rm = Roadmap.from_edges(verts, edges, B, costs=costs, start_vertex=0, end_vertex=n - 1)
            best = _enumerate_best(rm)
            if best is None:
                continue
            checked += 1
            agree += shortest_path(rm).total_cost == best
        return agree

    agree, dt = _timed(run)
    ok = agree == 200 and dt < 30
    report(4, ok, f"Dijkstra equals enumeration on {agree}/200 graphs", dt)
    assert ok


def _inside(points, poly):
    """Vectorised even-odd ray casting; boundary points may go either way."""
    x, y = points[:, 0], points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    for (x1, y1), (x2, y2) in zip(poly, np.roll(poly, -1, axis=0)):
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xc)
    return inside


def test_c05_voronoi_membership(report):
    def run():
        bad = total = 0
        for seed in range(20):
            rm, _, _ = make_world(SimConfig(), seed)
            g = rm.generators
            pts = np.random.default_rng(500 + seed).random((1000, 2)) * 2000
            d = np.linalg.norm(pts[:, None, :] - g[None, :, :], axis=2)
            owner = np.full(len(pts), -1)
            for i, poly in enumerate(rm.cells):
                owner[_inside(pts, np.asarray(poly))] = i
            ok = (owner >= 0) & (d[np.arange(len(pts)), owner] <= d.min(axis=1) + 1e-9)
            bad += int((~ok).sum())
            total += len(pts)
        # interior diagram edges: midpoints are equidistant from their two nearest
        # generators (border edges belong to a single cell)
        gs = place_generators(B, 100, 0)
        vr = build_voronoi_roadmap(gs, B)
        mids = np.array([(vr.vertices[i] + vr.vertices[j]) / 2 for i, j in vr.edges()])
        on_border = ((np.abs(mids - 0) < 1e-9) | (np.abs(mids - 2000) < 1e-9)).any(axis=1)
        mids = mids[~on_border]
        dm = np.sort(np.linalg.norm(mids[:, None] - gs.points[None], axis=2), axis=1)
        gap = float((dm[:, 1] - dm[:, 0]).max())
        return bad, total, gap

    (bad, total, gap), dt = _timed(run)
    ok = bad == 0 and gap <= 1e-9 and dt < 30
    report(5, ok, f"{total - bad}/{total} sampled points in their nearest generator's cell; "
                  f"edge equidistance gap {gap:.1e}", dt)
    assert ok


@pytest.fixture(scope="module")
def exp_runs(outdir):
    runs = {}

    def get(n, seeds):
        if n not in runs:
            res, dt = _timed(lambda: run_experiment(ExperimentSpec(n, seeds, out_dir=outdir / f"exp{n}")))
            runs[n] = (res, dt)
        return runs[n]
    return get


def test_c06_weighted_gain_ordering(report, exp_runs):
    res, dt = exp_runs(1, tuple(range(20)))
    s = res.summary
    ok = s["red_len_le_blue_frac"] >= 0.8 and s["green_min_var_frac"] >= 0.8 and dt < 120
    report(6, ok, f"red length <= blue on {s['red_len_le_blue_frac']:.0%} of seeds, "
                  f"green minimal variance on {s['green_min_var_frac']:.0%}", dt)
    assert ok


def test_c07_spatial_distribution_ordering(report, exp_runs):
    res, dt = exp_runs(2, tuple(range(20)))
    s = res.summary
    ok = s["high_gt_low_frac"] >= 0.7 and s["both_positive_frac"] == 1.0 and dt < 180
    report(7, ok, f"high-SD dissimilarity > low-SD on {s['high_gt_low_frac']:.0%} of seeds "
                  f"(need 70%), both > gamma-0 baseline on {s['both_positive_frac']:.0%}", dt)
    assert ok


def test_c08_exploration_value(report, exp_runs):
    res, dt = exp_runs(3, tuple(range(50)))
    s = res.summary
    ok = s["post_le_apriori_frac"] >= 0.6 and s["optimal_never_beaten"] and dt < 600
    report(8, ok, f"post-mission route <= a-priori route on {s['post_le_apriori_frac']:.0%} "
                  f"of seeds, true optimum never beaten: {s['optimal_never_beaten']}", dt)
    assert ok


def test_c09_replay_determinism(report, exp_runs, outdir):
    def run():
        same = {}
        for n, seeds in ((1, range(20)), (2, range(20)), (3, range(50))):
            exp_runs(n, tuple(seeds))
            src = outdir / f"exp{n}"
            replay(src / "manifest.json", outdir / f"replay{n}")
            same[n] = ((src / "metrics.csv").read_bytes()
                       == (outdir / f"replay{n}" / "metrics.csv").read_bytes())
        return same

    same, dt = _timed(run)
    ok = all(same.values())
    report(9, ok, "replayed metrics byte-identical for experiments "
                  + ", ".join(f"{n}:{'yes' if v else 'no'}" for n, v in same.items()), dt)
    assert ok


def test_c10_scoring_linearity(report):
    def run():
        rng = np.random.default_rng(10)
        worst, same_path = 0.0, 0
        for seed in range(20):
            rm, truth, _ = make_world(SimConfig(), seed)
            g = GainSet(*rng.uniform(0.05, 5, 3))
            lam = float(rng.uniform(0.01, 100))
            a, b = score_all(rm, truth, g), score_all(rm, truth, g.scaled(lam))
            mask = rm.adjacency
            rel = np.abs(b.edge_costs[mask] - lam * a.edge_costs[mask]) / (lam * a.edge_costs[mask])
            worst = max(worst, float(rel.max()))
            same_path += shortest_path(a).vertex_sequence == shortest_path(b).vertex_sequence
        return worst, same_path

    (worst, same_path), dt = _timed(run)
    ok = worst <= 1e-12 and same_path == 20
    report(10, ok, f"max relative scaling error {worst:.1e}, path unchanged on {same_path}/20", dt)
    assert ok
