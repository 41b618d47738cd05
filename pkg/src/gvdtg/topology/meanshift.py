"""Mean shift restricted to mutually visible neighbours."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..grid import Cell, OccupancyGrid
from ..kernels import FREE
from .cache import ConnectivityCache
from .kdtree import KDTree


class InsufficientPointsError(ValueError):
    pass


def bandwidth(points, q: float = 0.3, max_points: int = 2000, seed: int = 0) -> float:
    """q-quantile of all pairwise distances (linear interpolation)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 2:
        raise InsufficientPointsError("insufficient points: need at least 2 to set a bandwidth")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    if len(pts) > max_points:
        rng = np.random.default_rng(seed)
        pts = pts[np.sort(rng.choice(len(pts), max_points, replace=False))]
    i, j = np.triu_indices(len(pts), k=1)
    d = np.hypot(pts[i, 0] - pts[j, 0], pts[i, 1] - pts[j, 1])
    return float(np.quantile(d, q))


def to_cell(p) -> Cell:
    return (int(math.floor(p[0] + 0.5)), int(math.floor(p[1] + 0.5)))


def snap_free(grid: OccupancyGrid, p, max_radius: int = 64):
    """Nearest free cell to a continuous point; ties go to the smaller (y, x)."""
    cx, cy = to_cell(p)
    for r in range(0, max_radius + 1):
        y0, y1 = max(cy - r, 0), min(cy + r, grid.height - 1)
        x0, x1 = max(cx - r, 0), min(cx + r, grid.width - 1)
        if y0 > y1 or x0 > x1:
            continue
        sub = grid.cells[y0:y1 + 1, x0:x1 + 1]
        ys, xs = np.nonzero(sub == FREE)
        if xs.size == 0:
            continue
        xs = xs + x0
        ys = ys + y0
        d2 = (xs - p[0]) ** 2 + (ys - p[1]) ** 2
        # anything outside the Chebyshev ring r could still beat a corner hit;
        # accept only when the winner is provably nearest, strictly, so that a
        # tie just outside the ring still gets its (y, x) say
        best = np.lexsort((xs, ys, d2))[0]
        if math.sqrt(d2[best]) < r + 0.5 or r == max_radius:
            return (int(xs[best]), int(ys[best]))
    return None


@dataclass
class MeanShiftResult:
    centers: np.ndarray  # (k, 2) int cells
    labels: np.ndarray  # (n,) index into centers
    modes: np.ndarray  # (n, 2) float converged seed positions
    singletons: int = 0


def shift_seed(start, points, neighbours, grid: OccupancyGrid, link, eps_conv: float, max_iters: int,
               visible=None):
    """Iterate one seed; ``neighbours(c)`` returns sorted candidate indices.

    ``visible(cell, idx)`` is an optional batched form of ``link`` returning
    a boolean mask over ``points[idx]``.
    """
    c = np.asarray(start, dtype=np.float64)
    for _ in range(max_iters):
        cc = to_cell(c)
        cand = neighbours(c)
        if visible is not None:
            nbr = cand[visible(cc, cand)] if len(cand) else cand
        else:
            nbr = [j for j in cand if link(cc, to_cell(points[j]))]
        if len(nbr) == 0:
            break
        new = points[nbr].mean(axis=0)
        nc = to_cell(new)
        if not grid.is_free(nc) or not link(cc, nc):
            break
        shift = math.hypot(new[0] - c[0], new[1] - c[1])
        c = new
        if shift < eps_conv:
            break
    return c


def merge_modes(modes, grid: OccupancyGrid, link, eps_merge: float):
    """Greedy merge of converged modes; returns list of free center cells."""
    reps: list[np.ndarray] = []
    members: list[list[int]] = []
    for i, m in enumerate(modes):
        for k, rep in enumerate(reps):
            if math.hypot(m[0] - rep[0], m[1] - rep[1]) < eps_merge and link(to_cell(rep), to_cell(m)):
                members[k].append(i)
                break
        else:
            reps.append(m)
            members.append([i])
    centers: list[Cell] = []
    for mem in members:
        avg = modes[mem].mean(axis=0)
        cell = snap_free(grid, avg)
        if cell is not None and cell not in centers:
            centers.append(cell)
    return centers


def assign_labels(points, centers: list[Cell], link):
    """Nearest visible centre per point; orphaned points become their own centre."""
    centers = list(centers)
    labels = np.empty(len(points), dtype=np.int64)
    singletons = 0
    for i, p in enumerate(points):
        pc = (int(p[0]), int(p[1]))
        order = sorted(range(len(centers)), key=lambda k: ((centers[k][0] - p[0]) ** 2 + (centers[k][1] - p[1]) ** 2, k))
        for k in order:
            if link(pc, centers[k]):
                labels[i] = k
                break
        else:
            centers.append(pc)
            labels[i] = len(centers) - 1
            singletons += 1
    return centers, labels, singletons


def mean_shift(
    points,
    grid: OccupancyGrid,
    cache: ConnectivityCache,
    r_m: float,
    eps_conv: float = 0.1,
    max_iters: int = 50,
    eps_merge: float | None = None,
    leaf_capacity: int = 16,
) -> MeanShiftResult:
    """Connectivity-constrained mean shift over GVD node centres.

    Every point seeds a climb; a step only averages neighbours within
    ``r_m`` that are visible from the current centre, and stops early when
    the new mean is off free space or not visible from the old one.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise InsufficientPointsError("mean_shift needs at least one point")
    if not r_m > 0:
        raise ValueError("bandwidth must be positive")
    eps_merge = r_m / 2.0 if eps_merge is None else eps_merge
    tree = KDTree(pts, leaf_capacity)

    def link(a, b):
        return cache.connected(grid, a, b)

    # the climb tests visibility directly: a memo lookup costs more than the
    # compiled segment walk, and both give the same answer on a fixed grid
    modes = kernels.shift_all(grid.cells, pts, *tree.flat(), float(r_m), float(eps_conv), int(max_iters))
    centers = merge_modes(modes, grid, link, eps_merge)
    centers, labels, singletons = assign_labels(pts, centers, link)
    return MeanShiftResult(np.array(centers, dtype=np.int64).reshape(-1, 2), labels, modes, singletons)
