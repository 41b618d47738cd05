"""Incremental GVD sampling and topological exploration on occupancy grids."""
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid, denoise, diff, line_of_sight, load_grid

__version__ = "0.1.0"

__all__ = ["FREE", "OCCUPIED", "UNKNOWN", "OccupancyGrid", "denoise", "diff", "line_of_sight", "load_grid"]
