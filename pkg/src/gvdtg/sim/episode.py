"""Exploration episode loop and the two target-selection strategies."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import kernels
from ..config import Config
from ..frontier import EXPLORED, classify, crop
from ..grid import Cell, OccupancyGrid, denoise, diff
from ..gvd import CoverageMask, GvdNode, sample_frame
from ..kernels import FREE, UNKNOWN
from ..planner import NoReachableFrontier, evaluate, maybe_switch, prepare
from ..topology.cache import ConnectivityCache
from ..topology.graph import TopoGraph, build_graph, connect_components
from ..topology.meanshift import bandwidth, mean_shift, snap_free
from .robot import RobotState, WaypointPath, drive
from .sensor import SensorModel, integrate_into, scan
from .world import World, default_start, reachable_free

log = logging.getLogger(__name__)

METHODS = ("gvd-tg", "greedy")


@dataclass
class EpisodeMetrics:
    steps: int
    sim_time: float
    distance: float
    coverage: float
    revisit_ratio: float
    success: bool
    trajectory: list[tuple[int, float, float, float]] = field(default_factory=list, repr=False)
    reason: str = ""
    frames: int = 0
    wall_time: float = 0.0

    CSV_FIELDS = ("steps", "sim_time", "distance", "coverage", "revisit_ratio", "success", "reason", "frames")

    def row(self) -> dict:
        return {
            "steps": self.steps,
            "sim_time": f"{self.sim_time:.1f}",
            "distance": f"{self.distance:.4f}",
            "coverage": f"{self.coverage:.6f}",
            "revisit_ratio": f"{self.revisit_ratio:.6f}",
            "success": int(self.success),
            "reason": self.reason,
            "frames": self.frames,
        }


@dataclass
class Decision:
    frame: int
    chosen_id: int
    cost: float
    branch: int
    n_candidates: int


@dataclass
class Choice:
    target: Cell
    target_id: int
    route: list[Cell]
    decision: Decision


@dataclass
class EpisodeResult:
    metrics: EpisodeMetrics
    decisions: list[Decision]
    belief: OccupancyGrid
    nodes: list[GvdNode]
    graph: Optional[TopoGraph]
    world: World
    method: str
    start: Cell


class GvdTopoExplorer:
    """Denoise, sample, cluster, connect, classify and score every planning frame."""

    def __init__(self, cfg: Config, shape: tuple[int, int], resolution: float, origin):
        self.cfg = cfg
        self.params = cfg.sampling()
        self.costs = cfg.cost()
        self.resolution = resolution
        self.origin = origin
        self.mask = CoverageMask(*shape)
        self.cache = ConnectivityCache(cfg.cache_capacity)
        self.nodes: list[GvdNode] = []
        self.prev_belief = OccupancyGrid(np.zeros(shape, dtype=np.uint8), resolution, origin)
        self.prev_grid: Optional[OccupancyGrid] = None
        self.graph: Optional[TopoGraph] = None
        self.grid: Optional[OccupancyGrid] = None
        self.settled: set[int] = set()
        self.blacklist: set[int] = set()
        self.target: Optional[int] = None

    def arrived(self, target_id: int):
        self.blacklist.add(target_id)
        self.target = None

    def unreachable(self, target_id: int):
        self.blacklist.add(target_id)
        self.target = None

    def plan(self, belief: np.ndarray, robot: Cell, heading: float, frame: int) -> Optional[Choice]:
        cfg = self.cfg
        bel = OccupancyGrid(belief.copy(), self.resolution, self.origin)
        grid = denoise(bel, self.prev_belief, cfg.denoise_vote, cfg.denoise_scope)
        self.prev_belief = bel
        if self.prev_grid is not None:
            self.cache.invalidate(diff(grid, self.prev_grid))
        self.prev_grid = grid
        self.grid = grid

        self.nodes.extend(sample_frame(grid, self.mask, robot, self.params, cfg.seed, frame))
        if not self.nodes:
            return None
        pts = np.array([[n.x, n.y] for n in self.nodes], dtype=np.float64)
        r_m = bandwidth(pts, cfg.quantile, cfg.bandwidth_max_points, cfg.seed) if len(pts) > 1 else 1.0
        r_m = max(r_m, 1.0)
        ms = mean_shift(pts, grid, self.cache, r_m, cfg.eps_conv, cfg.max_iters,
                        cfg.eps_merge_factor * r_m, cfg.leaf_capacity)
        graph = build_graph(self.nodes, ms.centers, ms.labels)
        connect_components(graph, grid, self.cache, cfg.edge_radius_factor * r_m, cfg.leaf_capacity)
        self.graph = graph

        frontier_ids = []
        for i, node in enumerate(self.nodes):
            if i in self.settled or i in self.blacklist:
                continue
            st = classify(grid, node, i, cfg.min_contact, cfg.max_obstacle_fraction)
            if st.is_frontier:
                frontier_ids.append(i)
            elif st.status == EXPLORED and not (crop(grid, node.x, node.y, node.radius) == UNKNOWN).any():
                # known cells never revert, so a fully known crop stays explored
                self.settled.add(i)
        if not frontier_ids:
            return None
        ctx = prepare(robot, graph, grid, self.cache)
        cands = [evaluate(robot, heading, i, graph, grid, self.cache, self.costs, ctx) for i in frontier_ids]
        try:
            best = maybe_switch(self.target, cands, cfg.gamma)
        except NoReachableFrontier:
            return None
        self.target = best.node_id
        route = [graph.nodes[k].cell for k in best.route]
        node = self.nodes[best.node_id]
        return Choice((node.x, node.y), best.node_id, route,
                      Decision(frame, best.node_id, best.cost, best.branch, len(cands)))


class GreedyFrontierExplorer:
    """Classical baseline: nearest frontier cell by grid path distance."""

    def __init__(self, cfg: Config, shape, resolution, origin):
        self.cfg = cfg
        self.blacklist: set[Cell] = set()
        self.target: Optional[Cell] = None
        self.graph = None
        self.nodes: list[GvdNode] = []
        self.width = shape[1]

    def _id(self, c: Cell) -> int:
        return c[1] * self.width + c[0]

    def arrived(self, target_id: int):
        # a target that is still a frontier after the visit cannot be cleared from there
        self.blacklist.add((target_id % self.width, target_id // self.width))
        self.target = None

    def unreachable(self, target_id: int):
        self.arrived(target_id)

    @staticmethod
    def frontier_cells(belief: np.ndarray) -> np.ndarray:
        free = belief == FREE
        unk = belief == UNKNOWN
        near = np.zeros_like(unk)
        near[1:, :] |= unk[:-1, :]
        near[:-1, :] |= unk[1:, :]
        near[:, 1:] |= unk[:, :-1]
        near[:, :-1] |= unk[:, 1:]
        return free & near

    def plan(self, belief: np.ndarray, robot: Cell, heading: float, frame: int) -> Optional[Choice]:
        front = self.frontier_cells(belief)
        if self.target is not None and front[self.target[1], self.target[0]] and self.target not in self.blacklist:
            t = self.target
            return Choice(t, self._id(t), [], Decision(frame, self._id(t), math.nan, 0, 1))
        dist = kernels.dijkstra_grid(belief == FREE, robot[0], robot[1])
        ok = front & np.isfinite(dist)
        for c in self.blacklist:
            ok[c[1], c[0]] = False
        ys, xs = np.nonzero(ok)
        if xs.size == 0:
            return None
        k = np.lexsort((xs, ys, dist[ys, xs]))[0]
        t = (int(xs[k]), int(ys[k]))
        self.target = t
        return Choice(t, self._id(t), [], Decision(frame, self._id(t), float(dist[t[1], t[0]]), 0, int(xs.size)))


def _astar_cells(passable: np.ndarray, a: Cell, b: Cell) -> Optional[list[Cell]]:
    length, px, py = kernels.bidir_astar(passable, a[0], a[1], b[0], b[1])
    if length < 0:
        return None
    return [(int(x), int(y)) for x, y in zip(px, py)]


def _pull_string(cells: np.ndarray, path: list[Cell]) -> list[Cell]:
    """Drop intermediate cells while the direct segment stays free."""
    if len(path) <= 2:
        return path
    out = [path[0]]
    i = 0
    while i < len(path) - 1:
        j = len(path) - 1
        while j > i + 1 and not kernels.los_free(cells, path[i][0], path[i][1], path[j][0], path[j][1]):
            j -= 1
        out.append(path[j])
        i = j
    return out


def plan_motion(belief: OccupancyGrid, pos: tuple[float, float], target: Cell,
                route: list[Cell]) -> Optional[WaypointPath]:
    """Waypoints from ``pos`` to ``target`` on the belief's free cells."""
    cells = belief.cells
    passable = cells == FREE
    robot = belief.cell_of(*pos)
    if not belief.is_free(target):
        snapped = snap_free(belief, target, max_radius=4)
        if snapped is None:
            return None
        target = snapped
    seq = [c for c in route if belief.is_free(c) and c != robot] + [target]
    path = [robot]
    for c in seq:
        if c == path[-1]:
            continue
        if kernels.los_free(cells, path[-1][0], path[-1][1], c[0], c[1]):
            path.append(c)
            continue
        leg = _astar_cells(passable, path[-1], c)
        if leg is None:
            path = None
            break
        path.extend(leg[1:])
    if path is None:
        path = _astar_cells(passable, robot, target)
        if path is None:
            return None
    path = _pull_string(cells, path)
    res = belief.resolution
    ox, oy = belief.origin
    pts = [belief.center_of(c) for c in path[1:]] or [belief.center_of(robot)]
    first = pts[0]
    if not kernels.segment_free(cells, (pos[0] - ox) / res, (pos[1] - oy) / res,
                                (first[0] - ox) / res, (first[1] - oy) / res):
        pts.insert(0, belief.center_of(robot))
    return WaypointPath(pts)


def _make_explorer(cfg: Config, method: str, shape, resolution, origin):
    if method == "gvd-tg":
        return GvdTopoExplorer(cfg, shape, resolution, origin)
    if method == "greedy":
        return GreedyFrontierExplorer(cfg, shape, resolution, origin)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def run_episode(world: World, cfg: Config, method: Optional[str] = None) -> EpisodeResult:
    """Drive one exploration run until coverage, exhaustion of frontiers, or budget."""
    t_wall = time.perf_counter()
    method = method or cfg.method
    truth = world.truth
    res = truth.resolution
    if math.isnan(cfg.start_x) or math.isnan(cfg.start_y):
        start = default_start(truth)
    else:
        start = truth.cell_of(cfg.start_x, cfg.start_y)
        if not truth.in_bounds(start) or not truth.is_free(start):
            raise ValueError(f"start pose ({cfg.start_x}, {cfg.start_y}) is not in free space")
    sx, sy = truth.center_of(start)
    state = RobotState(sx, sy, cfg.start_theta, cfg.v_max, math.radians(cfg.omega_max_deg))
    sensor = SensorModel(cfg.fov_deg, cfg.range_m, cfg.beams, cfg.range_noise_std)
    rng = np.random.default_rng(cfg.seed)

    explorable = reachable_free(truth, start)
    n_explorable = int(explorable.sum())
    belief = np.zeros(truth.shape, dtype=np.uint8)
    meta = OccupancyGrid(belief, res, truth.origin)
    explorer = _make_explorer(cfg, method, truth.shape, res, truth.origin)

    visits = np.zeros(truth.shape, dtype=np.int32)
    visits[start[1], start[0]] = 1
    cur_cell = start
    trajectory = [(0, state.x, state.y, state.theta)]
    decisions: list[Decision] = []
    distance = 0.0
    frames = 0
    path: Optional[WaypointPath] = None
    choice: Optional[Choice] = None
    last_plan = -(10 ** 9)
    force_plan = True
    spin_left = 0
    spun_on_map = -1
    map_version = 0
    coverage = 0.0
    success = False
    reason = "budget"
    gate = math.radians(cfg.heading_gate_deg)
    tol = cfg.waypoint_tol_cells * res
    steps = 0

    for step in range(1, cfg.budget + 1):
        steps = step
        s = scan(world, state.pose, sensor, rng)
        if integrate_into(belief, meta, s, cfg.range_m):
            map_version += 1
        coverage = float((belief[explorable] == FREE).sum()) / n_explorable
        if coverage >= cfg.coverage_goal:
            success = True
            reason = "coverage"
            steps = step - 1
            break

        if spin_left == 0 and (force_plan or path is None or path.done or step - last_plan >= cfg.pipeline_every_n_steps):
            frames += 1
            last_plan = step
            force_plan = False
            robot = meta.cell_of(state.x, state.y)
            new_choice = explorer.plan(belief, robot, state.theta, frames)
            if new_choice is None:
                if spun_on_map != map_version:
                    # look around once before giving up on this map
                    spun_on_map = map_version
                    spin_left = int(math.ceil(2 * math.pi / (state.omega_max * cfg.dt)))
                    path = None
                    choice = None
                else:
                    reason = "no reachable frontier"
                    steps = step - 1
                    break
            else:
                decisions.append(new_choice.decision)
                if choice is None or new_choice.target != choice.target or path is None or path.done:
                    path = plan_motion(meta, (state.x, state.y), new_choice.target, new_choice.route)
                    choice = new_choice
                    if path is None:
                        explorer.unreachable(new_choice.target_id)
                        choice = None
                        force_plan = True

        if spin_left > 0:
            spin_left -= 1
            state = RobotState(state.x, state.y, (state.theta + state.omega_max * cfg.dt + math.pi) % (2 * math.pi) - math.pi,
                               state.v_max, state.omega_max)
        elif path is not None and not path.done:
            out = drive(state, path, cfg.dt, meta, gate, tol)
            state = out.state
            if out.moved:
                distance += out.moved
                c = meta.cell_of(state.x, state.y)
                if c != cur_cell:
                    visits[c[1], c[0]] += 1
                    cur_cell = c
            if out.replan:
                path = None
                force_plan = True
            elif path.done and choice is not None:
                explorer.arrived(choice.target_id)
                choice = None
                force_plan = True
        trajectory.append((step, state.x, state.y, state.theta))
    else:
        steps = cfg.budget

    entered = int((visits > 0).sum())
    revisit = float((visits > 1).sum()) / entered if entered else 0.0
    metrics = EpisodeMetrics(
        steps=steps,
        sim_time=steps * cfg.dt,
        distance=distance,
        coverage=coverage,
        revisit_ratio=revisit,
        success=success,
        trajectory=trajectory,
        reason=reason,
        frames=frames,
        wall_time=time.perf_counter() - t_wall,
    )
    log.info("%s/%s seed=%d: %s cov=%.3f steps=%d dist=%.2f revisit=%.3f wall=%.1fs",
             world.name, method, cfg.seed, reason, coverage, steps, distance, revisit, metrics.wall_time)
    return EpisodeResult(metrics, decisions, meta.with_cells(belief.copy()), list(explorer.nodes),
                         explorer.graph, world, method, start)
