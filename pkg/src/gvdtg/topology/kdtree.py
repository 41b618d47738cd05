"""Median-split 2-d tree for radius queries."""
from __future__ import annotations

import numpy as np

from .. import kernels


class KDTree:
    """Alternating x/y median splits down to ``leaf_capacity`` points per leaf.

    ``radius_query`` returns sorted indices of points with squared distance
    ``<= r*r``, i.e. the closed disk.
    """

    def __init__(self, points, leaf_capacity: int = 16):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        if leaf_capacity < 1:
            raise ValueError("leaf_capacity must be >= 1")
        self.points = pts
        self.leaf_capacity = int(leaf_capacity)
        self._perm = np.arange(len(pts))
        # node arrays: start, end, axis (-1 for leaf), split, left, right
        self._start: list[int] = []
        self._end: list[int] = []
        self._axis: list[int] = []
        self._split: list[float] = []
        self._left: list[int] = []
        self._right: list[int] = []
        if len(pts):
            self._build(0, len(pts), 0)
        self._arrays = (
            np.asarray(self._start, dtype=np.int64),
            np.asarray(self._end, dtype=np.int64),
            np.asarray(self._axis, dtype=np.int64),
            np.asarray(self._split, dtype=np.float64),
            np.asarray(self._left, dtype=np.int64),
            np.asarray(self._right, dtype=np.int64),
        )

    def __len__(self):
        return len(self.points)

    def _new(self, start, end, axis, split):
        self._start.append(start)
        self._end.append(end)
        self._axis.append(axis)
        self._split.append(split)
        self._left.append(-1)
        self._right.append(-1)
        return len(self._start) - 1

    def _build(self, start: int, end: int, depth: int) -> int:
        n = end - start
        if n <= self.leaf_capacity:
            return self._new(start, end, -1, 0.0)
        axis = depth % 2
        idx = self._perm[start:end]
        mid = n // 2
        part = np.argpartition(self.points[idx, axis], mid)
        self._perm[start:end] = idx[part]
        split = float(self.points[self._perm[start + mid], axis])
        node = self._new(start, end, axis, split)
        left = self._build(start, start + mid, depth + 1)
        right = self._build(start + mid, end, depth + 1)
        self._left[node] = left
        self._right[node] = right
        return node

    def height(self) -> int:
        if not self._start:
            return 0
        best = 0
        stack = [(0, 1)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self._axis[node] >= 0:
                stack.append((self._left[node], d + 1))
                stack.append((self._right[node], d + 1))
        return best

    def flat(self) -> tuple:
        """``(perm, start, end, axis, split, left, right)`` arrays for compiled queries."""
        return (self._perm, *self._arrays)

    def radius_query(self, center, r: float) -> np.ndarray:
        return kernels.kd_radius(self.points, *self.flat(), float(center[0]), float(center[1]), float(r))
