"""Regenerate the bundled fixture worlds (deterministic)."""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from gvdtg.grid import OccupancyGrid, save_grid
from gvdtg.kernels import FREE, OCCUPIED

N = 200
WALL = 3


def room() -> np.ndarray:
    c = np.full((N, N), FREE, dtype=np.uint8)
    c[:WALL, :] = c[-WALL:, :] = OCCUPIED
    c[:, :WALL] = c[:, -WALL:] = OCCUPIED
    return c


def box(c, x0, y0, x1, y1):
    c[y0:y1, x0:x1] = OCCUPIED


def disk(c, cx, cy, r):
    yy, xx = np.mgrid[:N, :N]
    c[(xx - cx) ** 2 + (yy - cy) ** 2 <= r * r] = OCCUPIED


def open_obstacles():
    c = room()
    box(c, 30, 30, 60, 55)
    box(c, 120, 25, 170, 40)
    disk(c, 100, 100, 14)
    box(c, 25, 120, 45, 170)
    box(c, 140, 120, 165, 160)
    disk(c, 70, 160, 10)
    box(c, 85, 55, 95, 80)
    return c


def narrow_passages():
    c = room()
    # two interior walls, each pierced by doors 14 cells (0.7 m) wide
    box(c, 65, 0, 68, N)
    box(c, 132, 0, 135, N)
    c[30:44, 65:68] = FREE
    c[150:164, 65:68] = FREE
    c[95:109, 132:135] = FREE
    # side rooms in the middle bay
    box(c, 68, 100, 100, 103)
    c[100:103, 84:98] = FREE
    box(c, 100, 135, 132, 138)
    c[135:138, 104:118] = FREE
    return c


def bisected_hall():
    c = room()
    box(c, 0, 98, N, 102)
    c[98:102, 10:30] = FREE
    c[98:102, 170:190] = FREE
    box(c, 60, 40, 140, 50)
    box(c, 60, 150, 140, 160)
    return c


def dense_clutter():
    c = room()
    rng = np.random.default_rng(4)
    for gy in range(25, N - 20, 30):
        for gx in range(25, N - 20, 30):
            if abs(gx - 100) < 20 and abs(gy - 100) < 20:
                continue
            jx, jy = rng.integers(-5, 6, size=2)
            w, h = rng.integers(5, 12, size=2)
            box(c, gx + jx, gy + jy, gx + jx + w, gy + jy + h)
    return c


def disconnected():
    c = room()
    box(c, 0, 98, N, 102)
    return c


WORLDS = {
    "s1": open_obstacles,
    "s2": narrow_passages,
    "s3": bisected_hall,
    "s4": dense_clutter,
}


def main(argv):
    root = Path(__file__).resolve().parent.parent
    out = root / "src" / "gvdtg" / "worlds"
    out.mkdir(exist_ok=True)
    for name, fn in WORLDS.items():
        save_grid(OccupancyGrid(fn(), 0.05), out / f"{name}.txt")
    fixtures = root / "tests" / "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    save_grid(OccupancyGrid(disconnected(), 0.05), fixtures / "disconnected.txt")
    empty = np.full((100, 100), FREE, dtype=np.uint8)
    empty[:2, :] = empty[-2:, :] = OCCUPIED
    empty[:, :2] = empty[:, -2:] = OCCUPIED
    save_grid(OccupancyGrid(empty, 0.05), fixtures / "empty_room.txt")
    corridor = np.full((30, 120), OCCUPIED, dtype=np.uint8)
    corridor[10:21, 5:115] = FREE
    save_grid(OccupancyGrid(corridor, 0.05), fixtures / "corridor.txt")


if __name__ == "__main__":
    main(sys.argv[1:])
