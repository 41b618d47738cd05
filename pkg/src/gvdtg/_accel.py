"""Numba switch for the grid kernels.

Set ``GVDTG_NUMBA=0`` to run every kernel as plain Python/numpy. The flag is
read once at import time, so set it before importing :mod:`gvdtg`.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("GVDTG_NUMBA", "1").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None

USE_NUMBA: bool = _numba is not None and _FLAG not in ("0", "false", "no", "off")


def njit(fn=None, **kwargs):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    opts = {"cache": True, "nogil": True}
    opts.update(kwargs)

    def wrap(f):
        if USE_NUMBA:
            return _numba.njit(**opts)(f)
        return f

    if fn is None:
        return wrap
    return wrap(fn)
