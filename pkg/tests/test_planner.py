import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from divroute.errors import ConfigError, NoPathError
from divroute.geometry import Bounds, Point
from divroute.planner import (PenaltyParams, Route, load_routes, penalize_costs, penalty_at,
                              plan_diverse_routes, route_dissimilarity, save_routes,
                              shortest_path)
from divroute.roadmap import Roadmap
from divroute.scoring import GainSet, score_all

B = Bounds()
GAINS = GainSet(0.6, 0.3, 0.1)


def all_simple_paths(adj, s, t):
    out = []

    def dfs(path):
        u = path[-1]
        if u == t:
            out.append(tuple(path))
            return
        for v in range(len(adj)):
            if adj[u][v] and v not in path:
                dfs(path + [v])

    dfs([s])
    return out


def random_graph(rng, n, p=0.4, integer=True):
    verts = rng.random((n, 2)) * 2000
    edges, costs = [], []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges.append((i, j))
            costs.append(float(rng.integers(1, 20)) if integer else float(rng.uniform(0.1, 10)))
    return Roadmap.from_edges(verts, edges, B, costs=costs, start_vertex=0, end_vertex=n - 1)


def brute_best(rm):
    paths = all_simple_paths(rm.adjacency.tolist(), rm.start_vertex, rm.end_vertex)
    if not paths:
        return None, None
    C = rm.edge_costs

    def cost(p):
        total = 0.0
        for u, v in zip(p, p[1:]):
            total += C[u, v]
        return total

    best = min(cost(p) for p in paths)
    return best, min(p for p in paths if cost(p) == best)


class TestShortestPath:
    def test_single_edge(self):
        rm = Roadmap.from_edges([(0, 0), (3, 4)], [(0, 1)], B, start_vertex=0, end_vertex=1)
        r = shortest_path(rm)
        assert r.vertex_sequence == (0, 1)
        assert r.total_cost == 5.0
        assert r.total_length == 5.0

    def test_no_path(self):
        rm = Roadmap.from_edges([(0, 0), (3, 4), (5, 5)], [(0, 1)], B, start_vertex=0, end_vertex=2)
        with pytest.raises(NoPathError):
            shortest_path(rm)

    def test_rejects_nonpositive(self):
        rm = Roadmap.from_edges([(0, 0), (3, 4)], [(0, 1)], B, costs=[0.0],
                                start_vertex=0, end_vertex=1)
        with pytest.raises(ConfigError):
            shortest_path(rm)

    def test_uniform_costs_fewest_hops(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            rm = random_graph(rng, 9, 0.35)
            rm = rm.with_costs(np.where(rm.adjacency, 7.0, 0.0))
            _, best = brute_best(rm)
            if best is None:
                continue
            hops = min(len(p) for p in all_simple_paths(rm.adjacency.tolist(), 0, 8)) - 1
            assert shortest_path(rm).edge_count == hops

    def test_lexicographic_tie_break(self):
        # two equal-cost paths 0-2-3 and 0-1-3: the smaller sequence wins
        rm = Roadmap.from_edges([(0, 0), (1, 1), (1, -1), (2, 0)],
                                [(0, 2), (2, 3), (0, 1), (1, 3)], B, costs=[1, 1, 1, 1],
                                start_vertex=0, end_vertex=3)
        assert shortest_path(rm).vertex_sequence == (0, 1, 3)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(2, 10), st.integers(0, 2**32 - 1), st.booleans())
    def test_matches_enumeration(self, n, seed, integer):
        rm = random_graph(np.random.default_rng(seed), n, 0.45, integer)
        best, seq = brute_best(rm)
        if best is None:
            with pytest.raises(NoPathError):
                shortest_path(rm)
            return
        r = shortest_path(rm)
        if integer:
            assert r.total_cost == best
            assert r.vertex_sequence == seq
        else:
            assert r.total_cost == pytest.approx(best, rel=1e-12)


class TestPenalty:
    def test_gamma_zero(self):
        p = PenaltyParams(0.0, 0.001)
        assert penalty_at(p, (0, 0), (0, 0)) == 0.0
        assert penalty_at(p, (0, 0), (100, 0)) == 0.0

    def test_peak(self):
        p = PenaltyParams(100.0, 0.0003)
        assert penalty_at(p, (5, 5), (5, 5)) == pytest.approx(100 / math.sqrt(2 * math.pi * 0.0003), rel=1e-15)

    def test_decreasing(self):
        p = PenaltyParams(100.0, 0.0003, distance_normalizer=1.0)
        assert penalty_at(p, (0, 0), (0.1, 0)) > penalty_at(p, (0, 0), (0.2, 0))

    def test_normalized_distance(self):
        p = PenaltyParams(2.0, 0.01, distance_normalizer=2000.0)
        d = 150.0 / 2000.0
        want = 2.0 / math.sqrt(2 * math.pi * 0.01) * math.exp(-d * d / (2 * 0.01))
        assert penalty_at(p, (0, 0), (90, 120)) == pytest.approx(want, rel=1e-14)

    def test_verbatim_exponent(self):
        p = PenaltyParams(2.0, 0.01, distance_normalizer=2000.0, exponent="verbatim")
        d = 150.0 / 2000.0
        want = 2.0 / math.sqrt(2 * math.pi * 0.01) * math.exp(-d * d / (2 * 0.1))
        assert penalty_at(p, (0, 0), (90, 120)) == pytest.approx(want, rel=1e-14)

    @pytest.mark.parametrize("kw", [dict(gamma=-1), dict(sigma_bar_sq=0), dict(exponent="x")])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            PenaltyParams(**kw)

    @given(st.floats(0.01, 1000), st.floats(1e-6, 1), st.floats(0, 3000), st.floats(0, 3000))
    def test_positive_and_monotone(self, gamma, s2, d1, d2):
        p = PenaltyParams(gamma, s2)
        f1, f2 = penalty_at(p, (0, 0), (d1, 0)), penalty_at(p, (0, 0), (d2, 0))
        if d1 < d2 and f1 > 0:
            assert f1 >= f2


def line_graph():
    # 0 - 1 - 2 committed route; a separate free edge 3 - 4
    verts = [(0, 0), (100, 0), (200, 0), (50, 60), (150, 80)]
    return Roadmap.from_edges(verts, [(0, 1), (1, 2), (3, 4), (0, 3), (4, 2)], B,
                              start_vertex=0, end_vertex=2)


def test_penalize_hand_sum():
    rm = line_graph()
    route = shortest_path(rm)
    assert route.vertex_sequence == (0, 1, 2)
    p = PenaltyParams(50.0, 0.002)
    out = penalize_costs(rm, [route], p)
    mid = (100.0, 70.0)
    terms = []
    for m in [(50.0, 0.0), (150.0, 0.0)]:
        d = math.dist(mid, m) / 2000.0
        terms.append(50.0 / math.sqrt(2 * math.pi * 0.002) * math.exp(-d * d / (2 * 0.002)))
    assert out.edge_costs[3, 4] - rm.edge_costs[3, 4] == pytest.approx(sum(terms), rel=1e-12)
    assert np.array_equal(out.edge_costs, out.edge_costs.T)
    assert (out.edge_costs >= rm.edge_costs).all()


def test_penalize_noop_cases():
    rm = line_graph()
    route = shortest_path(rm)
    assert np.array_equal(penalize_costs(rm, [], PenaltyParams(50.0)).edge_costs, rm.edge_costs)
    assert np.array_equal(penalize_costs(rm, [route], PenaltyParams(0.0)).edge_costs, rm.edge_costs)


def test_penalty_additive(world):
    rm, truth, _ = world
    scored = score_all(rm, truth, GAINS)
    r1, r2 = plan_diverse_routes(scored, 2, PenaltyParams(100.0, 3e-4))
    p = PenaltyParams(100.0, 3e-4)
    both = penalize_costs(scored, [r1, r2], p).edge_costs - scored.edge_costs
    one = penalize_costs(scored, [r1], p).edge_costs - scored.edge_costs
    two = penalize_costs(scored, [r2], p).edge_costs - scored.edge_costs
    assert np.allclose(both, one + two, rtol=1e-12, atol=1e-9)


class TestDiverse:
    def test_gamma_zero_identical(self, world):
        rm, truth, _ = world
        routes = plan_diverse_routes(score_all(rm, truth, GAINS), 3, PenaltyParams(0.0))
        assert routes[0].vertex_sequence == routes[1].vertex_sequence == routes[2].vertex_sequence

    def test_single_route_is_shortest(self, world):
        rm, truth, _ = world
        scored = score_all(rm, truth, GAINS)
        [r] = plan_diverse_routes(scored, 1, PenaltyParams(500.0, 3e-5))
        assert r.vertex_sequence == shortest_path(scored).vertex_sequence

    def test_large_gamma_more_dissimilar(self, world):
        rm, truth, _ = world
        scored = score_all(rm, truth, GAINS)

        def spread(g):
            rs = plan_diverse_routes(scored, 3, PenaltyParams(g, 3e-4))
            return np.mean([route_dissimilarity(a, b) for a, b in itertools.combinations(rs, 2)])

        assert spread(0.0) == 0.0
        assert spread(100.0) > spread(0.0)

    def test_recorded_costs(self, world):
        rm, truth, _ = world
        scored = score_all(rm, truth, GAINS)
        routes = plan_diverse_routes(scored, 3, PenaltyParams(100.0, 3e-4))
        for k, r in enumerate(routes):
            pen = penalize_costs(scored, routes[:k], PenaltyParams(100.0, 3e-4)).edge_costs
            seq = r.vertex_sequence
            assert r.total_cost == pytest.approx(sum(pen[u, v] for u, v in zip(seq, seq[1:])), rel=1e-12)
            assert r.base_total_cost <= r.total_cost
            assert seq[0] == rm.start_vertex and seq[-1] == rm.end_vertex
            assert len(set(seq)) == len(seq)
            assert all(rm.adjacency[u, v] for u, v in zip(seq, seq[1:]))

    def test_invalid_count(self, world):
        with pytest.raises(ConfigError):
            plan_diverse_routes(world[0], 0, PenaltyParams())

    def test_dissimilarity_nondecreasing_in_gamma_majority(self, cfg):
        from divroute.mission import make_world
        from divroute.planner import mean_pairwise_dissimilarity
        ok = 0
        for seed in range(10):
            rm, truth, _ = make_world(cfg, seed)
            scored = score_all(rm, truth, GAINS)
            d = [mean_pairwise_dissimilarity(plan_diverse_routes(scored, 3, PenaltyParams(g, 3e-4)))
                 for g in (0.0, 100.0, 500.0)]
            ok += d[0] <= d[1] <= d[2]
        assert ok >= 6


def mk_route(points):
    pts = tuple(Point(*p) for p in points)
    return Route(tuple(range(len(pts))), pts, tuple(1.0 for _ in pts[1:]))


class TestDissimilarity:
    def test_identity(self):
        r = mk_route([(0, 0), (10, 5), (30, 7)])
        assert route_dissimilarity(r, r) == 0.0

    def test_parallel_offset(self):
        a = mk_route([(0, 0), (100, 0), (200, 0), (300, 0)])
        b = mk_route([(0, 50), (100, 50), (200, 50), (300, 50)])
        assert route_dissimilarity(a, b) == pytest.approx(50.0)

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.floats(0, 2000), st.floats(0, 2000)), min_size=2, max_size=12),
           st.lists(st.tuples(st.floats(0, 2000), st.floats(0, 2000)), min_size=2, max_size=12))
    def test_matches_quadratic_scan(self, pa, pb):
        a, b = mk_route(pa), mk_route(pb)
        ma, mb = a.edge_midpoints, b.edge_midpoints
        ab = sum(min(math.dist(p, q) for q in mb) for p in ma) / len(ma)
        ba = sum(min(math.dist(q, p) for p in ma) for q in mb) / len(mb)
        assert route_dissimilarity(a, b) == pytest.approx((ab + ba) / 2, rel=1e-9, abs=1e-9)
        assert route_dissimilarity(a, b) == pytest.approx(route_dissimilarity(b, a), abs=1e-9)


def test_route_export_round_trip(tmp_path, world):
    rm, truth, _ = world
    routes = plan_diverse_routes(score_all(rm, truth, GAINS), 2, PenaltyParams(100.0, 3e-4))
    save_routes(routes, tmp_path / "r.json")
    back = load_routes(tmp_path / "r.json")
    assert [r.vertex_sequence for r in back] == [r.vertex_sequence for r in routes]
    assert [r.penalties for r in back] == [r.penalties for r in routes]
    save_routes(back, tmp_path / "r2.json")
    assert (tmp_path / "r.json").read_bytes() == (tmp_path / "r2.json").read_bytes()
