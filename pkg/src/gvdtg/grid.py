"""Occupancy grids, incremental differencing, denoising and line of sight."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .kernels import FREE, OCCUPIED, UNKNOWN

Cell = tuple[int, int]

_CHAR_TO_STATE = {"?": UNKNOWN, ".": FREE, "#": OCCUPIED}
_STATE_TO_CHAR = {v: k for k, v in _CHAR_TO_STATE.items()}


class GridMismatchError(ValueError):
    pass


class MapParseError(ValueError):
    def __init__(self, message: str, line: int, token: str = ""):
        self.line = line
        self.token = token
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class OccupancyGrid:
    """Ternary raster. ``cells[y, x]`` holds UNKNOWN, FREE or OCCUPIED."""

    cells: np.ndarray
    resolution: float = 0.05
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] == 0 or cells.shape[1] == 0:
            raise ValueError(f"grid must be a non-empty 2-D array, got shape {cells.shape}")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        cells = cells.astype(np.uint8, copy=False)
        if cells.size and cells.max() > OCCUPIED:
            raise ValueError("cell states must be 0 (unknown), 1 (free) or 2 (occupied)")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def unknown(cls, width: int, height: int, resolution: float = 0.05, origin=(0.0, 0.0)):
        return cls(np.zeros((height, width), dtype=np.uint8), resolution, origin)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def state(self, cell: Cell) -> int:
        return int(self.cells[cell[1], cell[0]])

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.cells[cell[1], cell[0]] == FREE

    def cell_of(self, x: float, y: float) -> Cell:
        return (
            int(math.floor((x - self.origin[0]) / self.resolution)),
            int(math.floor((y - self.origin[1]) / self.resolution)),
        )

    def center_of(self, cell: Cell) -> tuple[float, float]:
        return (
            self.origin[0] + (cell[0] + 0.5) * self.resolution,
            self.origin[1] + (cell[1] + 0.5) * self.resolution,
        )

    def compatible(self, other: "OccupancyGrid") -> bool:
        return (
            self.cells.shape == other.cells.shape
            and math.isclose(self.resolution, other.resolution)
            and np.allclose(self.origin, other.origin)
        )

    def with_cells(self, cells: np.ndarray) -> "OccupancyGrid":
        return OccupancyGrid(cells, self.resolution, self.origin)

    def copy(self) -> "OccupancyGrid":
        return self.with_cells(self.cells.copy())

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return self.compatible(other) and np.array_equal(self.cells, other.cells)

    __hash__ = None


@dataclass(frozen=True)
class IncrementalRegion:
    """Cells whose state changed between two frames, plus their bounding box.

    ``bbox`` is ``(x, y, w, h)``; the empty region has ``(0, 0, 0, 0)``.
    """

    mask: np.ndarray
    bbox: tuple[int, int, int, int]

    @property
    def changed(self) -> set[Cell]:
        ys, xs = np.nonzero(self.mask)
        return {(int(x), int(y)) for x, y in zip(xs, ys)}

    @property
    def empty(self) -> bool:
        return self.bbox[2] == 0

    def slices(self) -> tuple[slice, slice]:
        x, y, w, h = self.bbox
        return slice(y, y + h), slice(x, x + w)

    def intersects(self, box: tuple[int, int, int, int]) -> bool:
        """Overlap test against an inclusive cell box ``(x0, y0, x1, y1)``."""
        if self.empty:
            return False
        x, y, w, h = self.bbox
        x0, y0, x1, y1 = box
        return not (x1 < x or x0 >= x + w or y1 < y or y0 >= y + h)


def _check_compatible(new: OccupancyGrid, old: OccupancyGrid):
    if not new.compatible(old):
        raise GridMismatchError(
            f"grids differ: {new.shape}@{new.resolution} vs {old.shape}@{old.resolution}"
        )


def bounding_box(mask: np.ndarray) -> tuple[int, int, int, int]:
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        return (0, 0, 0, 0)
    x0, x1 = int(xs.min()), int(xs.max())
    y0, y1 = int(ys.min()), int(ys.max())
    return (x0, y0, x1 - x0 + 1, y1 - y0 + 1)


def diff(new: OccupancyGrid, old: OccupancyGrid) -> IncrementalRegion:
    _check_compatible(new, old)
    mask = new.cells != old.cells
    return IncrementalRegion(mask, bounding_box(mask))


def denoise(
    new: OccupancyGrid,
    old: OccupancyGrid,
    vote: str = "free",
    scope: str = "changed",
) -> OccupancyGrid:
    """Trusted-neighbourhood fill of unknown cells in the incremental region.

    Each candidate cell that is unknown in ``new`` becomes free when more than
    three cells of its clipped 5x5 window vote for it. ``vote="free"`` counts
    free neighbours, ``vote="known"`` counts any non-unknown neighbour.
    ``scope="changed"`` only considers cells that differ from ``old``;
    ``scope="crop"`` considers every unknown cell inside the increment's
    bounding box. Votes are counted on ``new`` before any edit.
    """
    if vote not in ("free", "known"):
        raise ValueError(f"unknown vote rule {vote!r}")
    if scope not in ("changed", "crop"):
        raise ValueError(f"unknown denoise scope {scope!r}")
    region = diff(new, old)
    if region.empty:
        return new
    x, y, w, h = region.bbox
    # votes only need a 2-cell apron around the box
    ya, yb = max(y - 2, 0), min(y + h + 2, new.height)
    xa, xb = max(x - 2, 0), min(x + w + 2, new.width)
    sub = new.cells[ya:yb, xa:xb]
    votes = sub == FREE if vote == "free" else sub != UNKNOWN
    n = kernels.box_count(votes, 2)
    cand = sub == UNKNOWN
    inner = np.zeros_like(cand)
    inner[y - ya:y - ya + h, x - xa:x - xa + w] = True
    cand &= inner
    if scope == "changed":
        cand &= region.mask[ya:yb, xa:xb]
    fill = cand & (n > 3)
    if not fill.any():
        return new
    out = new.cells.copy()
    out[ya:yb, xa:xb][fill] = FREE
    return new.with_cells(out)


def line_of_sight(grid: OccupancyGrid, a: Cell, b: Cell) -> bool:
    """Supercover visibility; unknown and occupied cells both block."""
    for c in (a, b):
        if not grid.in_bounds(c):
            raise IndexError(f"cell {c} outside {grid.width}x{grid.height} grid")
    return bool(kernels.los_free(grid.cells, int(a[0]), int(a[1]), int(b[0]), int(b[1])))


def supercover(a: Cell, b: Cell) -> list[Cell]:
    return kernels.supercover(int(a[0]), int(a[1]), int(b[0]), int(b[1]))


# ---------------------------------------------------------------- file formats
def parse_grid_text(text: str) -> OccupancyGrid:
    lines = text.splitlines()
    if not lines:
        raise MapParseError("empty map file", 1)
    head = lines[0].split()
    if not head or head[0] != "GRID":
        tok = head[0] if head else "<empty>"
        raise MapParseError(f"expected 'GRID' header, got {tok!r}", 1, tok)
    if len(head) != 4:
        raise MapParseError(
            f"header needs 'GRID <width> <height> <resolution>', got {len(head) - 1} fields",
            1,
            " ".join(head[1:]),
        )
    try:
        width = int(head[1])
    except ValueError:
        raise MapParseError(f"bad width {head[1]!r}", 1, head[1]) from None
    try:
        height = int(head[2])
    except ValueError:
        raise MapParseError(f"bad height {head[2]!r}", 1, head[2]) from None
    try:
        res = float(head[3])
    except ValueError:
        raise MapParseError(f"bad resolution {head[3]!r}", 1, head[3]) from None
    if width <= 0:
        raise MapParseError(f"bad width {head[1]!r}", 1, head[1])
    if height <= 0:
        raise MapParseError(f"bad height {head[2]!r}", 1, head[2])
    if not res > 0 or not math.isfinite(res):
        raise MapParseError(f"bad resolution {head[3]!r}", 1, head[3])
    rows = lines[1:1 + height]
    if len(rows) < height:
        raise MapParseError(f"expected {height} rows, found {len(rows)}", len(lines) + 1)
    cells = np.empty((height, width), dtype=np.uint8)
    for i, row in enumerate(rows):
        row = row.rstrip("\r\n")
        if len(row) != width:
            raise MapParseError(f"row has {len(row)} cells, expected {width}", i + 2, row[:16])
        for j, ch in enumerate(row):
            s = _CHAR_TO_STATE.get(ch)
            if s is None:
                raise MapParseError(f"bad cell character {ch!r} at column {j + 1}", i + 2, ch)
            cells[i, j] = s
    for k, extra in enumerate(lines[1 + height:]):
        if extra.strip():
            raise MapParseError("unexpected data after last row", height + 2 + k, extra[:16])
    return OccupancyGrid(cells, res)


def parse_pgm(data: bytes, resolution: float = 0.05) -> OccupancyGrid:
    """Binary P5 PGM: <64 occupied, >196 free, anything else unknown."""
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MapParseError("truncated PGM header", 1)
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise MapParseError(f"expected 'P5', got {tokens[0]!r}", 1, tokens[0].decode("latin-1"))
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise MapParseError("non-integer PGM header field", 1) from None
    pos += 1
    nbytes = 2 if maxval > 255 else 1
    need = width * height * nbytes
    raw = data[pos:pos + need]
    if len(raw) != need:
        raise MapParseError(f"PGM body has {len(raw)} bytes, expected {need}", 1)
    dtype = ">u2" if nbytes == 2 else np.uint8
    vals = np.frombuffer(raw, dtype=dtype).reshape(height, width).astype(np.float64)
    vals = vals * (255.0 / maxval)
    cells = np.full((height, width), UNKNOWN, dtype=np.uint8)
    cells[vals < 64] = OCCUPIED
    cells[vals > 196] = FREE
    return OccupancyGrid(cells, resolution)


def load_grid(path, resolution: float = 0.05) -> OccupancyGrid:
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        return parse_pgm(data, resolution)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MapParseError(f"not a text grid or P5 PGM ({exc.reason})", 1) from None
    return parse_grid_text(text)


def format_grid(grid: OccupancyGrid) -> str:
    lut = np.array([_STATE_TO_CHAR[s] for s in (UNKNOWN, FREE, OCCUPIED)])
    rows = ["".join(r) for r in lut[grid.cells]]
    return f"GRID {grid.width} {grid.height} {grid.resolution:g}\n" + "\n".join(rows) + "\n"


def save_grid(grid: OccupancyGrid, path) -> None:
    Path(path).write_text(format_grid(grid))


def from_strings(rows: Iterable[str], resolution: float = 0.05) -> OccupancyGrid:
    """Build a grid from rows of ``?.#`` characters (row index = y)."""
    rows = list(rows)
    cells = np.array([[_CHAR_TO_STATE[c] for c in r] for r in rows], dtype=np.uint8)
    return OccupancyGrid(cells, resolution)


def free_cells(grid: OccupancyGrid) -> np.ndarray:
    """``(n, 2)`` array of free ``(x, y)`` in row-major order."""
    ys, xs = np.nonzero(grid.cells == FREE)
    return np.stack([xs, ys], axis=1)
