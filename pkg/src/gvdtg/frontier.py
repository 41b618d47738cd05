"""Morphological frontier test for GVD nodes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .grid import OccupancyGrid
from .kernels import FREE, OCCUPIED, UNKNOWN

FRONTIER = "frontier"
EXPLORED = "explored"
PSEUDO = "pseudo"

MIN_CONTACT = 5
MAX_OBSTACLE_FRACTION = 0.8

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class FrontierStatus:
    node_id: int
    status: str
    contact_pixels: int = 0
    obstacle_fraction: Optional[float] = None

    @property
    def is_frontier(self) -> bool:
        return self.status == FRONTIER


def crop(grid: OccupancyGrid, x: int, y: int, radius: float) -> np.ndarray:
    half = math.ceil(radius) + 1
    return grid.cells[max(y - half, 0):y + half + 1, max(x - half, 0):x + half + 1]


def contact_counts(sub: np.ndarray) -> tuple[int, int]:
    """``(contact, obstacle_contact)`` after one 8-neighbour dilation per class."""
    unk = ndimage.binary_dilation(sub == UNKNOWN, _EIGHT)
    free = ndimage.binary_dilation(sub == FREE, _EIGHT)
    occ = ndimage.binary_dilation(sub == OCCUPIED, _EIGHT)
    touch = unk & free
    return int(touch.sum()), int((touch & occ).sum())


def classify(grid: OccupancyGrid, node, node_id: int = -1,
             min_contact: int = MIN_CONTACT, max_obstacle_fraction: float = MAX_OBSTACLE_FRACTION) -> FrontierStatus:
    sub = crop(grid, node.x, node.y, node.radius)
    has_unknown = bool((sub == UNKNOWN).any())
    if not has_unknown:
        return FrontierStatus(node_id, EXPLORED)
    has_free = bool((sub == FREE).any())
    has_occ = bool((sub == OCCUPIED).any())
    if has_free and not has_occ:
        return FrontierStatus(node_id, FRONTIER)
    contact, obstacle_contact = contact_counts(sub)
    if contact < min_contact:
        return FrontierStatus(node_id, EXPLORED, contact)
    frac = obstacle_contact / contact
    status = PSEUDO if frac > max_obstacle_fraction else FRONTIER
    return FrontierStatus(node_id, status, contact, frac)
