import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gvdtg.grid import FREE, OCCUPIED, OccupancyGrid
from gvdtg.planner import (
    Candidate,
    CostParams,
    NoReachableFrontier,
    detour_cost,
    evaluate,
    heading_error,
    maybe_switch,
    prepare,
    select,
    straight_cost,
)
from gvdtg.topology import ConnectivityCache, TopoGraph


def test_zero_turn_identity():
    assert straight_cost(7.25, 0.0, 0.1) == 7.25


def test_straight_branch_value():
    assert abs(straight_cost(10, math.pi / 2, 0.1) - 11.570796326794897) < 1e-9


def test_detour_branch_value():
    assert abs(detour_cost(10, 3, math.pi / 2, 2, 0.1, 0.05) - 13.157079632679490) < 1e-9


def test_cost_params_validation():
    with pytest.raises(ValueError):
        CostParams(alpha=-1)


def test_heading_error_folded():
    assert heading_error(0.0, (0, 0), (0, 5)) == pytest.approx(math.pi / 2)
    assert heading_error(0.0, (0, 0), (0, -5)) == pytest.approx(math.pi / 2)
    assert heading_error(math.pi, (0, 0), (5, 0)) == pytest.approx(math.pi)
    assert heading_error(1.0, (0, 0), (0, 0)) == 0.0


def cand(i, cost, d_t=1.0, straight=True):
    return Candidate(i, d_t, 0.0, straight, cost=cost)


def test_select_rules():
    assert select([cand(3, 4.0)]).node_id == 3
    assert select([cand(1, straight_cost(9, 0.2, 0.1), 9), cand(2, straight_cost(5, 0.2, 0.1), 5)]).node_id == 2
    assert select([cand(4, 5.0, 3.0), cand(2, 5.0, 2.0), cand(1, 5.0, 3.0)]).node_id == 2
    assert select([cand(4, 5.0, 3.0), cand(1, 5.0, 3.0)]).node_id == 1
    assert select([cand(1, math.inf), cand(2, 9.0)]).node_id == 2
    with pytest.raises(NoReachableFrontier, match="no reachable frontier"):
        select([cand(1, math.inf)])


@given(st.permutations(range(6)))
def test_select_order_independent(perm):
    cs = [cand(i, float(i % 3), float(i % 2)) for i in range(6)]
    assert select([cs[i] for i in perm]).node_id == select(cs).node_id


def test_hysteresis():
    assert maybe_switch(1, [cand(1, 10.0), cand(2, 9.5)], 0.9).node_id == 1
    assert maybe_switch(1, [cand(1, 10.0), cand(2, 5.0)], 0.9).node_id == 2
    # current dropped from the fresh set (no longer a frontier)
    assert maybe_switch(1, [cand(2, 50.0), cand(3, 60.0)], 0.9).node_id == 2
    assert maybe_switch(1, [cand(1, math.inf), cand(2, 50.0)], 0.9).node_id == 2
    assert maybe_switch(None, [cand(2, 5.0)], 0.9).node_id == 2


@given(st.integers(0, 2**31))
def test_scaling_preserves_argmin(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    straight = bool(rng.integers(0, 2))
    k = float(rng.uniform(0.5, 5))
    a, b = 0.1, 0.05

    def build(scale):
        out = []
        for i in range(n):
            d, th, T, N, de = rng_vals[i]
            if straight:
                out.append(Candidate(i, d * scale, th, True, cost=straight_cost(d * scale, th, a)))
            else:
                out.append(Candidate(i, d * scale, th, False, T * scale, N, de * scale,
                                     detour_cost(T * scale, N, th, de * scale, a, b)))
        return out

    rng_vals = [(rng.uniform(1, 50), rng.uniform(0, math.pi), rng.uniform(1, 80), int(rng.integers(0, 6)),
                 rng.uniform(0, 5)) for _ in range(n)]
    base, scaled = build(1.0), build(k)
    assert select(base).node_id == select(scaled).node_id
    for c0, c1 in zip(base, scaled):
        assert c1.cost == pytest.approx(k * c0.cost, rel=1e-12)


def test_scaling_hundred_sets():
    rng = np.random.default_rng(11)
    for trial in range(100):
        straight = trial % 2 == 0
        n = int(rng.integers(2, 12))
        vals = [(rng.uniform(1, 50), rng.uniform(0, math.pi), rng.uniform(1, 80), int(rng.integers(0, 6)),
                 rng.uniform(0, 5)) for _ in range(n)]
        k = float(rng.uniform(0.25, 8))
        pick = []
        for s in (1.0, k):
            cs = [Candidate(i, d * s, th, True, cost=straight_cost(d * s, th, 0.1)) if straight else
                  Candidate(i, d * s, th, False, T * s, N, de * s, detour_cost(T * s, N, th, de * s, 0.1, 0.05))
                  for i, (d, th, T, N, de) in enumerate(vals)]
            pick.append(select(cs).node_id)
        assert pick[0] == pick[1]


def walled_room():
    """Open room split by a wall with a gap at the bottom."""
    cells = np.full((30, 40), FREE, dtype=np.uint8)
    cells[0:22, 20] = OCCUPIED
    return OccupancyGrid(cells)


def room_graph(bridge=True):
    g = TopoGraph()
    g.add_node(10, 26, "gvd")  # 0 left, below the wall end
    g.add_node(30, 26, "gvd")  # 1 right, below the wall end
    g.add_node(30, 5, "gvd")   # 2 right, behind the wall
    g.add_node(5, 5, "gvd")    # 3 left, visible from the robot
    if bridge:
        g.add_edge(0, 1, 20.0, "straight")
    g.add_edge(1, 2, 21.0, "straight")
    g.add_edge(0, 3, math.hypot(5, 21), "straight")
    return g


def test_evaluate_straight_branch():
    grid, g, cache = walled_room(), room_graph(), ConnectivityCache()
    c = evaluate((10, 10), 0.0, 3, g, grid, cache)
    assert c.straight_ok and c.branch == 1
    assert c.cost == pytest.approx(straight_cost(math.hypot(5, 5), heading_error(0.0, (10, 10), (5, 5)), 0.1))


def test_evaluate_detour_branch():
    grid, g, cache = walled_room(), room_graph(), ConnectivityCache()
    robot = (10, 20)
    c = evaluate(robot, 0.0, 2, g, grid, cache)
    assert not c.straight_ok and c.branch == 2
    hop = math.hypot(0, 6)  # nearest visible node is 0
    assert c.route == [0, 1, 2]
    assert c.T == pytest.approx(hop + 41.0)
    assert c.N == 1 and c.d_e == 0.0
    theta = heading_error(0.0, robot, (10, 26))
    assert c.theta == pytest.approx(theta)
    assert c.cost == pytest.approx(detour_cost(hop + 41.0, 1, theta, 0.0, 0.1, 0.05))
    ctx = prepare(robot, g, grid, cache)
    assert evaluate(robot, 0.0, 2, g, grid, cache, context=ctx).cost == c.cost


def test_evaluate_unreachable():
    grid = walled_room()
    cells = grid.cells.copy()
    cells[:, 20] = OCCUPIED
    grid = grid.with_cells(cells)
    g = room_graph(bridge=False)
    c = evaluate((10, 20), 0.0, 2, g, grid, ConnectivityCache())
    assert c.unreachable and math.isinf(c.cost)
    with pytest.raises(NoReachableFrontier):
        select([c])


@given(st.integers(0, 2**31))
def test_branch_coherence(seed):
    rng = np.random.default_rng(seed)
    grid, g, cache = walled_room(), room_graph(), ConnectivityCache()
    free = np.argwhere(grid.cells == FREE)
    y, x = free[rng.integers(0, len(free))]
    heading = float(rng.uniform(-math.pi, math.pi))
    for i in range(len(g.nodes)):
        c = evaluate((int(x), int(y)), heading, i, g, grid, cache)
        if c.straight_ok:
            assert c.cost == pytest.approx(straight_cost(c.d_t, c.theta, 0.1))
        elif not c.unreachable:
            assert c.cost == pytest.approx(detour_cost(c.T, c.N, c.theta, c.d_e, 0.1, 0.05))
        assert 0.0 <= c.theta <= math.pi
