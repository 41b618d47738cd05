"""Memoized line-of-sight with LRU eviction and region invalidation."""
from __future__ import annotations

import threading
from collections import OrderedDict

import numpy as np

from .. import kernels
from ..grid import Cell, IncrementalRegion, OccupancyGrid

_MAX_COORD = 1 << 16


def _pack(c) -> int:
    return (int(c[1]) << 16) | int(c[0])


def _unpack(p: int) -> Cell:
    return (p & 0xFFFF, p >> 16)


class ConnectivityCache:
    """Unordered cell pairs map to their line-of-sight result.

    Keys are single integers (two packed 16-bit coordinates per cell), so
    grids are limited to 65536 cells per side.
    """

    def __init__(self, capacity: int = 1 << 18):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self._data: OrderedDict[int, bool] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.evaluations = 0

    def __len__(self):
        return len(self._data)

    def __contains__(self, pair) -> bool:
        return self._key(*pair) in self._data

    @staticmethod
    def _key(a: Cell, b: Cell) -> int:
        pa, pb = _pack(a), _pack(b)
        return (pa << 32) | pb if pa <= pb else (pb << 32) | pa

    @staticmethod
    def _pair(key: int) -> tuple[Cell, Cell]:
        return _unpack(key >> 32), _unpack(key & 0xFFFFFFFF)

    def keys(self) -> list[tuple[Cell, Cell]]:
        with self._lock:
            return [self._pair(k) for k in self._data]

    def _store(self, key: int, val: bool):
        self.evaluations += 1
        self._data[key] = val
        while len(self._data) > self.capacity:
            self._data.popitem(last=False)

    @staticmethod
    def _check(grid: OccupancyGrid, a, b):
        if not (grid.in_bounds(a) and grid.in_bounds(b)):
            raise IndexError(f"segment {tuple(a)}-{tuple(b)} leaves the {grid.width}x{grid.height} grid")

    def connected(self, grid: OccupancyGrid, a: Cell, b: Cell) -> bool:
        key = self._key(a, b)
        with self._lock:
            val = self._data.get(key)
            if val is not None:
                self._data.move_to_end(key)
                self.hits += 1
                return val
        self._check(grid, a, b)
        (x0, y0), (x1, y1) = self._pair(key)
        val = bool(kernels.los_free(grid.cells, x0, y0, x1, y1))
        with self._lock:
            self._store(key, val)
        return val

    def connected_many(self, grid: OccupancyGrid, a: Cell, others) -> np.ndarray:
        """``connected(grid, a, b)`` for every row ``b`` of an ``(k, 2)`` array."""
        bs = np.asarray(others, dtype=np.int64).reshape(-1, 2)
        out = np.empty(len(bs), dtype=bool)
        if len(bs) == 0:
            return out
        if (bs < 0).any() or (bs[:, 0] >= grid.width).any() or (bs[:, 1] >= grid.height).any():
            bad = bs[(bs[:, 0] < 0) | (bs[:, 1] < 0) | (bs[:, 0] >= grid.width) | (bs[:, 1] >= grid.height)][0]
            self._check(grid, a, bad)
        if not grid.in_bounds(a):
            self._check(grid, a, a)
        pa = _pack(a)
        pb = (bs[:, 1] << 16) | bs[:, 0]
        lo = np.minimum(pb, pa)
        hi = np.maximum(pb, pa)
        keys = ((lo << 32) | hi).tolist()
        miss = []
        with self._lock:
            get = self._data.get
            touch = self._data.move_to_end
            for i, k in enumerate(keys):
                v = get(k)
                if v is None:
                    miss.append(i)
                else:
                    out[i] = v
                    touch(k)
            self.hits += len(keys) - len(miss)
        if miss:
            idx = np.asarray(miss, dtype=np.int64)
            vals = kernels.los_many(grid.cells, int(a[0]), int(a[1]), bs[idx, 0], bs[idx, 1])
            out[idx] = vals
            with self._lock:
                for i, v in zip(miss, vals.tolist()):
                    self._store(keys[i], v)
        return out

    def invalidate(self, region: IncrementalRegion) -> int:
        """Drop entries whose segment bounding box meets the changed region."""
        if region.empty or not self._data:
            return 0
        x, y, w, h = region.bbox
        xe, ye = x + w - 1, y + h - 1
        with self._lock:
            keys = np.fromiter(self._data.keys(), dtype=np.uint64, count=len(self._data))
            a, b = keys >> np.uint64(32), keys & np.uint64(0xFFFFFFFF)
            m16 = np.uint64(0xFFFF)
            ax, ay = (a & m16).astype(np.int64), (a >> np.uint64(16)).astype(np.int64)
            bx, by = (b & m16).astype(np.int64), (b >> np.uint64(16)).astype(np.int64)
            miss = (np.maximum(ax, bx) < x) | (np.minimum(ax, bx) > xe) | (np.maximum(ay, by) < y) | (np.minimum(ay, by) > ye)
            stale = keys[~miss].tolist()
            for k in stale:
                del self._data[k]
        return len(stale)

    def clear(self):
        with self._lock:
            self._data.clear()


def connected(cache: ConnectivityCache, grid: OccupancyGrid, a: Cell, b: Cell) -> bool:
    return cache.connected(grid, a, b)
