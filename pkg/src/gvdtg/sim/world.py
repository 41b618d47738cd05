"""Ground-truth worlds."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..grid import Cell, OccupancyGrid, load_grid
from ..kernels import FREE, OCCUPIED, UNKNOWN

BUNDLED = ("s1", "s2", "s3", "s4")


@dataclass(frozen=True)
class World:
    truth: OccupancyGrid
    name: str = "world"

    def __post_init__(self):
        if (self.truth.cells == UNKNOWN).any():
            raise ValueError(f"world {self.name!r} contains unknown cells")

    @classmethod
    def from_grid(cls, grid: OccupancyGrid, name: str = "world") -> "World":
        # unknown cells in a ground-truth file are read as walls
        cells = grid.cells.copy()
        cells[cells == UNKNOWN] = OCCUPIED
        return cls(grid.with_cells(cells), name)


def load_world(path) -> World:
    path = Path(path)
    return World.from_grid(load_grid(path), path.stem)


def bundled_world(name: str) -> World:
    ref = resources.files("gvdtg") / "worlds" / f"{name}.txt"
    with resources.as_file(ref) as p:
        return World.from_grid(load_grid(p), name)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("gvdtg") / "worlds" / f"{name}.txt"))


def reachable_free(truth: OccupancyGrid, start: Cell) -> np.ndarray:
    """4-connected free cells reachable from ``start``."""
    free = truth.cells == FREE
    if not free[start[1], start[0]]:
        raise ValueError(f"start cell {start} is not free")
    labels, _ = ndimage.label(free)
    return labels == labels[start[1], start[0]]


def default_start(truth: OccupancyGrid, clearance: float = 4.0) -> Cell:
    """Free cell nearest the map centre with at least ``clearance`` cells to any wall."""
    dist = ndimage.distance_transform_edt(truth.cells == FREE)
    ys, xs = np.nonzero(dist >= clearance)
    if xs.size == 0:
        ys, xs = np.nonzero(truth.cells == FREE)
    if xs.size == 0:
        raise ValueError("world has no free cell")
    cx, cy = (truth.width - 1) / 2.0, (truth.height - 1) / 2.0
    k = np.lexsort((xs, ys, (xs - cx) ** 2 + (ys - cy) ** 2))[0]
    return int(xs[k]), int(ys[k])
