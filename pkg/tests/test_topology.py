import math
import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import all_simple_paths, mean_shift_naive
from gvdtg import kernels
from gvdtg.grid import FREE, OCCUPIED, OccupancyGrid, diff, line_of_sight
from gvdtg.gvd import GvdNode, SamplingParams, sample_to_fixpoint
from gvdtg.sim.world import load_world
from gvdtg.topology import (
    ConnectivityCache,
    InsufficientPointsError,
    KDTree,
    TopoGraph,
    UnreachableError,
    bandwidth,
    build_graph,
    connect_components,
    connected,
    mean_shift,
    topo_path,
)
from gvdtg.topology.meanshift import snap_free


def open_grid(w=40, h=40):
    return OccupancyGrid(np.full((h, w), FREE, dtype=np.uint8))


class TestKDTree:
    @given(st.integers(0, 2**31), st.integers(1, 300), st.integers(1, 20))
    def test_radius_query_matches_scan(self, seed, n, leaf):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 100, (n, 2))
        tree = KDTree(pts, leaf)
        for _ in range(10):
            c = rng.uniform(-10, 110, 2)
            r = rng.uniform(0, 40)
            d2 = ((pts - c) ** 2).sum(axis=1)
            assert tree.radius_query(c, r).tolist() == np.nonzero(d2 <= r * r)[0].tolist()

    def test_boundary_is_closed(self):
        tree = KDTree(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert tree.radius_query((0, 0), 5.0).tolist() == [0, 1]

    def test_duplicates_and_empty(self):
        tree = KDTree(np.zeros((50, 2)), 4)
        assert len(tree.radius_query((0, 0), 0.0)) == 50
        assert KDTree(np.empty((0, 2))).radius_query((0, 0), 10).size == 0

    def test_height_logarithmic(self):
        for n in (100, 1000, 10000):
            pts = np.random.default_rng(n).uniform(0, 1, (n, 2))
            h = KDTree(pts, 16).height()
            assert h <= math.ceil(math.log2(n / 16)) + 2

    def test_ten_thousand_points(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(0, 1000, (10000, 2))
        t0 = time.perf_counter()
        tree = KDTree(pts, 16)
        got = [tree.radius_query(rng.uniform(0, 1000, 2), rng.uniform(0, 100)) for _ in range(100)]
        assert time.perf_counter() - t0 < 5.0
        rng = np.random.default_rng(0)
        rng.uniform(0, 1000, (10000, 2))
        for g in got:
            c, r = rng.uniform(0, 1000, 2), rng.uniform(0, 100)
            assert g.tolist() == np.nonzero(((pts - c) ** 2).sum(axis=1) <= r * r)[0].tolist()


class TestBandwidth:
    def test_two_points(self):
        for q in (0.1, 0.3, 0.9):
            assert bandwidth([[0, 0], [4, 0]], q) == 4.0

    def test_collinear_five(self):
        pts = [[i, 0] for i in range(5)]
        assert bandwidth(pts, 0.3) == pytest.approx(1.0)
        assert bandwidth(pts, 0.5) == pytest.approx(2.0)

    def test_insufficient(self):
        with pytest.raises(InsufficientPointsError, match="insufficient points"):
            bandwidth([[0, 0]])

    def test_subsample_is_seeded(self):
        pts = np.random.default_rng(1).uniform(0, 100, (2500, 2))
        assert bandwidth(pts, seed=3) == bandwidth(pts, seed=3)


class TestCache:
    def test_memoized(self):
        g = open_grid()
        c = ConnectivityCache()
        assert connected(c, g, (1, 1), (30, 20))
        assert connected(c, g, (30, 20), (1, 1))
        assert c.evaluations == 1 and c.hits == 1

    def test_invalidated_by_new_wall(self):
        g = open_grid()
        c = ConnectivityCache()
        assert c.connected(g, (2, 10), (30, 10))
        assert c.connected(g, (2, 30), (8, 35))
        cells = g.cells.copy()
        cells[5:15, 15] = OCCUPIED
        g2 = g.with_cells(cells)
        assert c.invalidate(diff(g2, g)) == 1
        assert ((2, 30), (8, 35)) in c
        assert not c.connected(g2, (2, 10), (30, 10))
        assert c.evaluations == 3

    def test_lru_eviction(self):
        g = open_grid()
        c = ConnectivityCache(capacity=2)
        c.connected(g, (0, 0), (1, 1))
        c.connected(g, (0, 0), (2, 2))
        c.connected(g, (0, 0), (1, 1))  # refresh
        c.connected(g, (0, 0), (3, 3))
        assert ((0, 0), (1, 1)) in c and ((0, 0), (3, 3)) in c
        assert ((0, 0), (2, 2)) not in c

    @given(st.integers(0, 2**31))
    def test_batch_equals_single(self, seed):
        rng = np.random.default_rng(seed)
        cells = np.where(rng.random((30, 30)) < 0.1, OCCUPIED, FREE).astype(np.uint8)
        g = OccupancyGrid(cells)
        c = ConnectivityCache()
        a = tuple(int(v) for v in rng.integers(0, 30, 2))
        bs = rng.integers(0, 30, (40, 2))
        got = c.connected_many(g, a, bs)
        assert got.tolist() == [line_of_sight(g, a, tuple(b)) for b in bs.tolist()]
        assert c.connected_many(g, a, bs).tolist() == got.tolist()

    def test_out_of_bounds(self):
        with pytest.raises(IndexError):
            ConnectivityCache().connected(open_grid(), (0, 0), (40, 0))

    @given(st.integers(0, 2**31))
    def test_hits_equal_fresh_evaluation_across_frames(self, seed):
        rng = np.random.default_rng(seed)
        cells = np.full((25, 25), FREE, dtype=np.uint8)
        g = OccupancyGrid(cells)
        c = ConnectivityCache()
        for _ in range(4):
            for _ in range(20):
                a, b = rng.integers(0, 25, (2, 2)).tolist()
                c.connected(g, tuple(a), tuple(b))
            new = g.cells.copy()
            y, x = rng.integers(0, 25, 2)
            new[y:y + 3, x:x + 3] = OCCUPIED
            g2 = g.with_cells(new)
            c.invalidate(diff(g2, g))
            g = g2
            for a, b in c.keys():
                assert c.connected(g, a, b) == line_of_sight(g, a, b)


def wall_map():
    cells = np.full((30, 41), FREE, dtype=np.uint8)
    cells[0, :] = cells[-1, :] = cells[:, 0] = cells[:, -1] = OCCUPIED
    cells[:, 20] = OCCUPIED
    return OccupancyGrid(cells)


class TestMeanShift:
    def test_single_point(self):
        r = mean_shift([[5, 5]], open_grid(), ConnectivityCache(), 3.0)
        assert r.centers.tolist() == [[5, 5]] and r.labels.tolist() == [0]

    def test_two_visible_points(self):
        r = mean_shift([[10, 10], [14, 10]], open_grid(), ConnectivityCache(), 6.0)
        assert r.centers.tolist() == [[12, 10]] and r.labels.tolist() == [0, 0]

    def test_wall_splits_clusters(self):
        g = wall_map()
        pts = [[15, 10], [17, 14], [16, 18], [24, 10], [23, 15], [25, 18]]
        r = mean_shift(pts, g, ConnectivityCache(), 40.0)
        assert len(r.centers) == 2
        for i, p in enumerate(pts):
            c = r.centers[r.labels[i]]
            assert (p[0] < 20) == (c[0] < 20)
            assert line_of_sight(g, tuple(p), tuple(c))
        centers, labels, _ = mean_shift_naive(pts, g.cells, 40.0, los=lambda a, b: line_of_sight(g, a, b))
        assert [tuple(c) for c in r.centers.tolist()] == centers and r.labels.tolist() == labels

    def test_empty_input(self):
        with pytest.raises(InsufficientPointsError):
            mean_shift(np.empty((0, 2)), open_grid(), ConnectivityCache(), 1.0)

    def test_orphan_becomes_singleton(self):
        g = wall_map()
        cells = g.cells.copy()
        cells[3:8, 3:8] = OCCUPIED
        cells[5, 5] = FREE  # sealed pocket
        g = g.with_cells(cells)
        r = mean_shift([[5, 5], [12, 12], [13, 12]], g, ConnectivityCache(), 2.0)
        assert [5, 5] in r.centers.tolist()

    @given(st.integers(0, 2**31))
    def test_matches_naive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        cells = np.where(rng.random((40, 40)) < 0.06, OCCUPIED, FREE).astype(np.uint8)
        g = OccupancyGrid(cells)
        free = np.argwhere(cells == FREE)[:, ::-1]
        pts = free[rng.choice(len(free), size=min(len(free), int(rng.integers(1, 40))), replace=False)]
        r_m = float(rng.uniform(2, 15))
        r = mean_shift(pts, g, ConnectivityCache(), r_m)
        centers, labels, modes = mean_shift_naive(pts, cells, r_m, los=lambda a, b: line_of_sight(g, a, b))
        assert [tuple(c) for c in r.centers.tolist()] == centers
        assert r.labels.tolist() == labels
        for c in centers:
            assert cells[c[1], c[0]] == FREE
        for i, p in enumerate(pts.tolist()):
            assert line_of_sight(g, tuple(p), centers[labels[i]])


def test_snap_free_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(50):
        cells = np.where(rng.random((15, 15)) < 0.6, OCCUPIED, FREE).astype(np.uint8)
        g = OccupancyGrid(cells)
        p = rng.uniform(0, 14, 2)
        ys, xs = np.nonzero(cells == FREE)
        best = min(zip((xs - p[0]) ** 2 + (ys - p[1]) ** 2, ys, xs))
        assert snap_free(g, p) == (int(best[2]), int(best[1]))


def chain_graph(edges, n):
    g = TopoGraph()
    for i in range(n):
        g.add_node(i, 0, "gvd")
    for a, b, w in edges:
        g.add_edge(a, b, w, "straight")
    return g


class TestTopoPath:
    def test_same_node(self):
        g = chain_graph([], 1)
        assert topo_path(g, 0, 0) == ([0], 0.0, 0)

    def test_chain(self):
        g = chain_graph([(0, 1, 3), (1, 2, 4)], 3)
        path, T, N = topo_path(g, 0, 2)
        assert path == [0, 1, 2] and T == 7 and N == 1

    def test_unreachable(self):
        g = chain_graph([(0, 1, 1)], 3)
        with pytest.raises(UnreachableError, match="unreachable"):
            topo_path(g, 0, 2)

    def test_six_node_ties(self):
        # two equal-cost routes 0-1-2-5 and 0-3-5 (3 hops vs 2), plus 0-4-5 tying 0-3-5
        edges = [(0, 1, 1), (1, 2, 1), (2, 5, 2), (0, 3, 2), (3, 5, 2), (0, 4, 2), (4, 5, 2), (1, 4, 5)]
        g = chain_graph(edges, 6)
        path, T, N = topo_path(g, 0, 5)
        adj = {i: {} for i in range(6)}
        for a, b, w in edges:
            adj[a][b] = adj[b][a] = w
        best = min(
            (sum(adj[u][v] for u, v in zip(p, p[1:])), len(p), p) for p in all_simple_paths(adj, 0, 5)
        )
        assert (T, len(path), tuple(path)) == best
        assert path == [0, 3, 5]

    @given(st.integers(0, 2**31))
    def test_random_graphs_vs_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        n = 6
        edges = [(a, b, int(rng.integers(1, 4))) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.5]
        g = chain_graph(edges, n)
        adj = {i: {} for i in range(n)}
        for a, b, w in edges:
            adj[a][b] = adj[b][a] = w
        paths = all_simple_paths(adj, 0, n - 1)
        if not paths:
            with pytest.raises(UnreachableError):
                topo_path(g, 0, n - 1)
            return
        best = min((sum(adj[u][v] for u, v in zip(p, p[1:])), len(p), p) for p in paths)
        path, T, N = topo_path(g, 0, n - 1)
        assert (T, len(path), tuple(path)) == best and N == len(path) - 2


def two_rooms(door=True):
    cells = np.full((30, 61), OCCUPIED, dtype=np.uint8)
    cells[2:28, 2:25] = FREE
    cells[2:28, 36:59] = FREE
    if door:
        cells[13:18, 25:36] = FREE
    return OccupancyGrid(cells)


def audit_edges(graph, grid):
    for e in graph.edges.values():
        cells = e.path if e.path else e.cells(graph)
        for x, y in cells:
            assert grid.cells[y, x] == FREE
        a, b = graph.nodes[e.a], graph.nodes[e.b]
        assert e.weight > 0 and e.weight >= math.hypot(a.x - b.x, a.y - b.y) - 1e-9


class TestConnect:
    def test_one_node(self):
        g = build_graph([GvdNode(5, 5, 3.0)], np.empty((0, 2)), [])
        connect_components(g, open_grid(), ConnectivityCache(), 10.0)
        assert len(g.components()) == 1 and not g.edges

    def test_rooms_joined_by_corridor(self):
        grid = two_rooms()
        nodes = [GvdNode(8, 8, 5), GvdNode(18, 22, 5), GvdNode(30, 15, 2.5), GvdNode(45, 8, 5), GvdNode(52, 22, 5)]
        g = build_graph(nodes, np.array([[13, 15], [48, 15]]), [0, 0, 0, 1, 1])
        connect_components(g, grid, ConnectivityCache(), 6.0)
        assert len(g.components()) == 1 and not g.isolated
        audit_edges(g, grid)

    def test_rooms_without_door(self):
        grid = two_rooms(door=False)
        nodes = [GvdNode(8, 8, 5), GvdNode(18, 22, 5), GvdNode(45, 8, 5), GvdNode(52, 22, 5)]
        g = build_graph(nodes, np.empty((0, 2)), [])
        connect_components(g, grid, ConnectivityCache(), 30.0)
        comps = g.components()
        assert len(comps) == 2
        assert g.isolated == {0, 1, 2, 3}
        for e in g.edges.values():
            assert (g.nodes[e.a].x < 30) == (g.nodes[e.b].x < 30)

    def test_fixture_worlds_single_component(self, fixtures):
        from gvdtg.sim.world import BUNDLED, bundled_world

        for name in BUNDLED:
            grid = bundled_world(name).truth
            nodes, _ = sample_to_fixpoint(grid, SamplingParams())
            pts = np.array([[n.x, n.y] for n in nodes], dtype=float)
            r_m = bandwidth(pts)
            cache = ConnectivityCache()
            ms = mean_shift(pts, grid, cache, r_m)
            g = build_graph(nodes, ms.centers, ms.labels)
            connect_components(g, grid, cache, 2 * r_m)
            assert len(g.components()) == 1, name
            audit_edges(g, grid)

    def test_disconnected_fixture(self, fixtures):
        grid = load_world(fixtures / "disconnected.txt").truth
        nodes, _ = sample_to_fixpoint(grid, SamplingParams())
        pts = np.array([[n.x, n.y] for n in nodes], dtype=float)
        r_m = bandwidth(pts)
        cache = ConnectivityCache()
        ms = mean_shift(pts, grid, cache, r_m)
        g = build_graph(nodes, ms.centers, ms.labels)
        connect_components(g, grid, cache, 2 * r_m)
        assert len(g.components()) == 2
        for e in g.edges.values():
            assert (g.nodes[e.a].y < 100) == (g.nodes[e.b].y < 100)
        audit_edges(g, grid)


class TestAstar:
    def test_wall_detour_length(self):
        cells = np.full((20, 20), FREE, dtype=np.uint8)
        cells[0:15, 10] = OCCUPIED
        length, px, py = kernels.bidir_astar(cells == FREE, 2, 2, 17, 2)
        d = kernels.dijkstra_grid(cells == FREE, 2, 2)
        assert length == pytest.approx(d[2, 17])
        assert cells[py, px].tolist() == [FREE] * len(px)

    @given(st.integers(0, 2**31))
    def test_matches_dijkstra(self, seed):
        rng = np.random.default_rng(seed)
        free = rng.random((25, 25)) > 0.3
        ys, xs = np.nonzero(free)
        i, j = rng.integers(0, len(xs), 2)
        length, px, py = kernels.bidir_astar(free, xs[i], ys[i], xs[j], ys[j])
        d = kernels.dijkstra_grid(free, xs[i], ys[i])
        if not np.isfinite(d[ys[j], xs[j]]):
            assert length < 0
            return
        assert length == pytest.approx(d[ys[j], xs[j]], abs=1e-9)
        steps = np.hypot(np.diff(px), np.diff(py))
        assert steps.sum() == pytest.approx(length)
        assert free[py, px].all()
        for k in range(len(px) - 1):
            dx, dy = px[k + 1] - px[k], py[k + 1] - py[k]
            if dx and dy:
                assert free[py[k], px[k] + dx] and free[py[k] + dy, px[k]]
