"""Viewpoint cost evaluation and target switching."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .grid import Cell, OccupancyGrid
from .topology.cache import ConnectivityCache
from .topology.graph import TopoGraph, shortest_paths

INF = math.inf


class NoReachableFrontier(RuntimeError):
    pass


@dataclass(frozen=True)
class CostParams:
    alpha: float = 0.1
    beta: float = 0.05

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("cost weights must be non-negative")


@dataclass
class Candidate:
    node_id: int
    d_t: float
    theta: float
    straight_ok: bool
    T: float = 0.0
    N: int = 0
    d_e: float = 0.0
    cost: float = INF
    route: list[int] = field(default_factory=list)
    unreachable: bool = False

    @property
    def branch(self) -> int:
        return 1 if self.straight_ok else 2


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def heading_error(heading: float, src: Sequence[float], dst: Sequence[float]) -> float:
    """Unsigned turn in [0, pi] from ``heading`` to the bearing ``src -> dst``."""
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    if dx == 0 and dy == 0:
        return 0.0
    return abs(wrap_angle(math.atan2(dy, dx) - heading))


def straight_cost(d_t: float, theta: float, alpha: float) -> float:
    return d_t + alpha * theta * d_t


def detour_cost(T: float, N: int, theta: float, d_e: float, alpha: float, beta: float) -> float:
    return T + alpha * N * T + beta * theta * d_e


@dataclass
class PlanningContext:
    """Per-cycle data shared by every candidate: the entry node and its path table."""

    robot: Cell
    hop: Optional[int]
    hop_dist: float
    table: dict


def prepare(robot: Cell, graph: TopoGraph, grid: OccupancyGrid, cache: ConnectivityCache) -> PlanningContext:
    order = sorted(
        range(len(graph.nodes)),
        key=lambda i: (math.hypot(graph.nodes[i].x - robot[0], graph.nodes[i].y - robot[1]), i),
    )
    for i in order:
        if cache.connected(grid, robot, graph.nodes[i].cell):
            n = graph.nodes[i]
            return PlanningContext(robot, i, math.hypot(n.x - robot[0], n.y - robot[1]), shortest_paths(graph, i))
    return PlanningContext(robot, None, INF, {})


def evaluate(
    robot: Cell,
    heading: float,
    node_id: int,
    graph: TopoGraph,
    grid: OccupancyGrid,
    cache: ConnectivityCache,
    params: CostParams = CostParams(),
    context: Optional[PlanningContext] = None,
) -> Candidate:
    node = graph.nodes[node_id]
    d_t = math.hypot(node.x - robot[0], node.y - robot[1])
    if cache.connected(grid, robot, node.cell):
        theta = heading_error(heading, robot, node.cell)
        return Candidate(node_id, d_t, theta, True, cost=straight_cost(d_t, theta, params.alpha), route=[node_id])
    ctx = context if context is not None else prepare(robot, graph, grid, cache)
    cand = Candidate(node_id, d_t, 0.0, False, unreachable=True)
    if ctx.hop is None:
        return cand
    # route ends at the candidate's topological node when that is reachable
    end = graph.labels.get(node_id)
    if end is None or end not in ctx.table:
        end = node_id if node_id in ctx.table else None
    if end is None:
        return cand
    cost, path = ctx.table[end]
    path = list(path)
    end_node = graph.nodes[end]
    d_e = math.hypot(node.x - end_node.x, node.y - end_node.y)
    T = ctx.hop_dist + cost + d_e
    N = max(len(path) - 2, 0)
    first = graph.nodes[path[0]].cell
    if first == robot and len(path) > 1:
        first = graph.nodes[path[1]].cell
    theta = heading_error(heading, robot, first)
    route = path + ([node_id] if end != node_id else [])
    return Candidate(node_id, d_t, theta, False, T, N, d_e,
                     detour_cost(T, N, theta, d_e, params.alpha, params.beta), route)


def _rank(c: Candidate):
    return (c.cost, c.d_t, c.node_id)


def select(candidates: Sequence[Candidate]) -> Candidate:
    if not candidates:
        raise ValueError("select needs at least one candidate")
    finite = [c for c in candidates if math.isfinite(c.cost)]
    if not finite:
        raise NoReachableFrontier("no reachable frontier")
    return min(finite, key=_rank)


def maybe_switch(current: Optional[int], fresh: Sequence[Candidate], gamma: float = 0.9) -> Candidate:
    """Keep ``current`` unless the best fresh candidate beats it by the factor ``gamma``."""
    best = select(fresh)
    held = next((c for c in fresh if c.node_id == current), None) if current is not None else None
    if held is None or not math.isfinite(held.cost):
        return best
    if best.node_id != held.node_id and best.cost < gamma * held.cost:
        return best
    return held
