"""Coverage-aware hierarchical sampling of medial-axis (GVD) nodes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .grid import Cell, OccupancyGrid, free_cells
from .kernels import FREE


@dataclass(frozen=True)
class SamplingParams:
    r_min: int = 2
    delta_r: int = 1
    delta: float = 1.0
    step_high: int = 2
    step_low: int = 6
    local_range_m: float = 5.0
    d_o_threshold: float = 3.0
    snap_radius: int = 2
    # treat unknown cells as obstacles in the clearance search
    unknown_is_obstacle: bool = False

    def __post_init__(self):
        for name in ("r_min", "delta_r", "delta", "step_high", "step_low", "local_range_m", "d_o_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.step_high > self.step_low:
            raise ValueError("step_high must not exceed step_low")


@dataclass(frozen=True)
class GvdNode:
    x: int
    y: int
    radius: float
    frame: int = 0

    @property
    def center(self) -> Cell:
        return (self.x, self.y)

    @property
    def coverage_radius(self) -> int:
        return math.ceil(self.radius) + 1


class CoverageMask:
    """Set-only boolean raster of cells already claimed by a node disk."""

    def __init__(self, height: int, width: int):
        self._bits = np.zeros((height, width), dtype=bool)

    @classmethod
    def like(cls, grid: OccupancyGrid) -> "CoverageMask":
        return cls(grid.height, grid.width)

    @property
    def bits(self) -> np.ndarray:
        view = self._bits.view()
        view.flags.writeable = False
        return view

    @property
    def shape(self) -> tuple[int, int]:
        return self._bits.shape

    def covered(self, cell: Cell) -> bool:
        return bool(self._bits[cell[1], cell[0]])

    def count(self) -> int:
        return int(self._bits.sum())

    def copy(self) -> "CoverageMask":
        out = CoverageMask(*self._bits.shape)
        out._bits[:] = self._bits
        return out


def local_region(robot: Cell, params: SamplingParams, resolution: float, dims: tuple[int, int]):
    """Inclusive ``(x0, y0, x1, y1)`` of the fine-sampling window around ``robot``.

    ``dims`` is ``(width, height)``.
    """
    half = int(math.floor(params.local_range_m / (2.0 * resolution) + 1e-9))
    w, h = dims
    x, y = robot
    return (max(x - half, 0), max(y - half, 0), min(x + half, w - 1), min(y + half, h - 1))


def nearest_obstacles(grid: OccupancyGrid, p: Cell, params: SamplingParams):
    """``(d_min, O)``: clearance of ``p`` and the obstacle cells within ``d_min + delta``."""
    if not grid.is_free(p):
        raise ValueError(f"cell {p} is not free")
    d_min, xs, ys, _ = kernels.ring_search(
        grid.cells, int(p[0]), int(p[1]), int(params.r_min), int(params.delta_r),
        float(params.delta), bool(params.unknown_is_obstacle),
    )
    return float(d_min), {(int(x), int(y)) for x, y in zip(xs, ys)}


def bisect_node(
    p: Cell, d_min: float, obstacles, grid: OccupancyGrid, params: SamplingParams, frame: int = 0
) -> Optional[GvdNode]:
    """Place a node midway between the two farthest-apart obstacles in ``obstacles``."""
    pts = sorted(obstacles, key=lambda c: (c[1], c[0]))
    if len(pts) < 2:
        return None
    xs = np.array([c[0] for c in pts], dtype=np.int64)
    ys = np.array([c[1] for c in pts], dtype=np.int64)
    ok, gx, gy, rg = kernels.bisect(
        grid.cells, xs, ys, float(params.r_min), float(params.d_o_threshold), float(params.delta),
        bool(params.unknown_is_obstacle), int(params.snap_radius),
    )
    if not ok:
        return None
    return GvdNode(int(gx), int(gy), float(rg), frame)


def mark_coverage(mask: CoverageMask, node: GvdNode) -> int:
    """Claim every cell within ``ceil(r) + 1`` of the node; returns #newly set."""
    return int(kernels.mark_disk(mask._bits, int(node.x), int(node.y), int(node.coverage_radius)))


def candidate_cells(
    grid: OccupancyGrid, mask: CoverageMask, robot: Cell, params: SamplingParams, rng: np.random.Generator
) -> np.ndarray:
    """Shuffled free cells thinned by the dual step sizes, in visiting order."""
    free = free_cells(grid)
    if free.size == 0:
        return free
    order = free[rng.permutation(len(free))]
    k = np.arange(len(order))
    keep = k % params.step_high == 0
    keep &= ~mask._bits[order[:, 1], order[:, 0]]
    x0, y0, x1, y1 = local_region(robot, params, grid.resolution, (grid.width, grid.height))
    inside = (order[:, 0] >= x0) & (order[:, 0] <= x1) & (order[:, 1] >= y0) & (order[:, 1] <= y1)
    keep &= inside | (k % params.step_low == 0)
    return order[keep]


def sample_frame(
    grid: OccupancyGrid,
    mask: CoverageMask,
    robot: Cell,
    params: SamplingParams,
    seed: int = 0,
    frame: int = 0,
) -> list[GvdNode]:
    """One sampling pass; returns the accepted nodes in acceptance order.

    Candidates are gathered against the mask as it stood when the frame
    began; acceptance then runs largest radius first, re-checking the mask
    after every commit so no accepted centre lies inside an earlier disk.
    """
    if mask.shape != grid.shape:
        raise ValueError(f"mask shape {mask.shape} does not match grid {grid.shape}")
    rng = np.random.default_rng([int(seed), int(frame)])
    cand = candidate_cells(grid, mask, robot, params, rng)
    if len(cand) == 0:
        return []
    ok, gx, gy, rg = kernels.sample_candidates(
        grid.cells,
        np.ascontiguousarray(cand[:, 0]),
        np.ascontiguousarray(cand[:, 1]),
        int(params.r_min), int(params.delta_r), float(params.delta), float(params.d_o_threshold),
        bool(params.unknown_is_obstacle), int(params.snap_radius),
    )
    idx = np.nonzero(ok)[0]
    # radius priority; visiting order breaks ties
    idx = idx[np.lexsort((idx, -rg[idx]))]
    accepted: list[GvdNode] = []
    bits = mask._bits
    for i in idx:
        x, y = int(gx[i]), int(gy[i])
        if bits[y, x] or grid.cells[y, x] != FREE:
            continue
        node = GvdNode(x, y, float(rg[i]), frame)
        mark_coverage(mask, node)
        accepted.append(node)
    return accepted


def sample_to_fixpoint(
    grid: OccupancyGrid,
    params: SamplingParams,
    robot: Optional[Cell] = None,
    seed: int = 0,
    max_frames: int = 200,
    mask: Optional[CoverageMask] = None,
) -> tuple[list[GvdNode], CoverageMask]:
    """Repeat frames on a static map until a frame yields no new node."""
    mask = mask if mask is not None else CoverageMask.like(grid)
    if robot is None:
        robot = (grid.width // 2, grid.height // 2)
    nodes: list[GvdNode] = []
    for frame in range(max_frames):
        new = sample_frame(grid, mask, robot, params, seed=seed, frame=frame)
        if not new:
            break
        nodes.extend(new)
    return nodes, mask


def write_nodes_csv(nodes, path) -> None:
    with open(path, "w") as fh:
        fh.write("x,y,r,frame\n")
        for n in nodes:
            fh.write(f"{n.x},{n.y},{n.radius:.6f},{n.frame}\n")
