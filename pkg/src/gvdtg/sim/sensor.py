"""Ray-cast range sensor and deterministic belief integration."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import kernels
from ..grid import OccupancyGrid
from ..kernels import FREE
from .world import World


@dataclass(frozen=True)
class SensorModel:
    fov_deg: float = 270.0
    range_m: float = 3.5
    beams: int = 360
    noise_std: float = 0.0

    def __post_init__(self):
        if self.beams < 1:
            raise ValueError("beams must be >= 1")
        if not self.range_m > 0:
            raise ValueError("range must be positive")

    def offsets(self) -> np.ndarray:
        if self.beams == 1:
            return np.zeros(1)
        fov = math.radians(self.fov_deg)
        full = self.fov_deg >= 360.0
        return np.linspace(-fov / 2, fov / 2, self.beams, endpoint=not full)


@dataclass
class Scan:
    """World-frame beam angles, ranges in metres, and hit flags (False = max-range miss).

    ``hit_cells`` keeps the (x, y) cell each noise-free beam stopped in, so
    the belief update marks exactly that cell.
    """

    angles: np.ndarray
    ranges: np.ndarray
    hits: np.ndarray
    origin: tuple[float, float]
    hit_cells: Optional[np.ndarray] = None


def scan(world: World, pose, sensor: SensorModel, rng: Optional[np.random.Generator] = None) -> Scan:
    truth = world.truth
    x, y, theta = pose
    c = truth.cell_of(x, y)
    if not truth.is_free(c):
        raise ValueError(f"pose ({x:.3f}, {y:.3f}) lies in an obstacle")
    res = truth.resolution
    ox = (x - truth.origin[0]) / res
    oy = (y - truth.origin[1]) / res
    angles = theta + sensor.offsets()
    d, hx, hy = kernels.scan_all(truth.cells, ox, oy, angles, sensor.range_m / res)
    hits = d >= 0
    ranges = np.where(hits, d * res, sensor.range_m)
    exact = np.stack([hx, hy], axis=1)
    if sensor.noise_std > 0 and rng is not None:
        noisy = ranges + rng.normal(0.0, sensor.noise_std, size=ranges.shape)
        ranges = np.where(hits, np.clip(noisy, 0.0, sensor.range_m), ranges)
        exact = None
    return Scan(angles, ranges, hits, (x, y), exact)


def integrate_into(cells: np.ndarray, grid_meta: OccupancyGrid, s: Scan, max_range_m: float) -> int:
    """In-place belief update; returns the number of cells that changed state."""
    res = grid_meta.resolution
    ox = (s.origin[0] - grid_meta.origin[0]) / res
    oy = (s.origin[1] - grid_meta.origin[1]) / res
    if s.hit_cells is not None:
        return int(kernels.integrate_hits(cells, ox, oy, s.angles, s.hit_cells[:, 0], s.hit_cells[:, 1],
                                          max_range_m / res))
    dists = np.where(s.hits, s.ranges / res, -1.0)
    return int(kernels.integrate_rays(cells, ox, oy, s.angles, dists, max_range_m / res))


def integrate(belief: OccupancyGrid, pose, s: Scan, max_range_m: Optional[float] = None) -> OccupancyGrid:
    """Beam cells before the hit become free, the hit cell occupied."""
    cells = belief.cells.copy()
    if max_range_m is None:
        max_range_m = float(np.max(s.ranges)) if len(s.ranges) else 0.0
    integrate_into(cells, belief, s, max_range_m)
    return belief.with_cells(cells)


def observed_free(belief: OccupancyGrid) -> np.ndarray:
    return belief.cells == FREE
