"""SVG output for maps, trajectories and topological graphs."""
from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .grid import OccupancyGrid
from .kernels import FREE, OCCUPIED, UNKNOWN

COLORS = {UNKNOWN: "#b0b0b0", FREE: "#ffffff", OCCUPIED: "#202020"}


def _runs(row: np.ndarray):
    """``(start, length, value)`` for each constant run in a 1-d array."""
    edges = np.flatnonzero(np.diff(row)) + 1
    starts = np.concatenate(([0], edges))
    ends = np.concatenate((edges, [len(row)]))
    for s, e in zip(starts.tolist(), ends.tolist()):
        yield s, e - s, int(row[s])


def _map_layer(grid: OccupancyGrid) -> list[str]:
    out = [f'<rect x="0" y="0" width="{grid.width}" height="{grid.height}" fill="{COLORS[UNKNOWN]}"/>']
    for y in range(grid.height):
        for x, n, v in _runs(grid.cells[y]):
            if v != UNKNOWN:
                out.append(f'<rect x="{x}" y="{y}" width="{n}" height="1" fill="{COLORS[v]}"/>')
    return out


def _star(cx: float, cy: float, r: float) -> str:
    pts = []
    for k in range(10):
        rr = r if k % 2 == 0 else r * 0.45
        a = -math.pi / 2 + k * math.pi / 5
        pts.append(f"{cx + rr * math.cos(a):.2f},{cy + rr * math.sin(a):.2f}")
    return f'<polygon class="end" points="{" ".join(pts)}" fill="#d62728"/>'


def _graph_layer(graph, nodes: Sequence = ()) -> list[str]:
    out = []
    for disk in nodes:
        out.append(f'<circle cx="{disk.x + 0.5}" cy="{disk.y + 0.5}" r="{disk.radius:.2f}" '
                   f'fill="none" stroke="#9ecae1" stroke-width="0.3"/>')
    if graph is None:
        return out
    for (a, b), e in sorted(graph.edges.items()):
        if e.path:
            pts = " ".join(f"{x + 0.5},{y + 0.5}" for x, y in e.path)
            out.append(f'<polyline points="{pts}" fill="none" stroke="#ff7f0e" stroke-width="0.4"/>')
        else:
            na, nb = graph.nodes[a], graph.nodes[b]
            out.append(f'<line x1="{na.x + 0.5}" y1="{na.y + 0.5}" x2="{nb.x + 0.5}" y2="{nb.y + 0.5}" '
                       f'stroke="#2ca02c" stroke-width="0.25"/>')
    for n in graph.nodes:
        color, r = ("#9467bd", 1.6) if n.kind == "center" else ("#1f77b4", 0.9)
        out.append(f'<circle cx="{n.x + 0.5}" cy="{n.y + 0.5}" r="{r}" fill="{color}"/>')
    return out


def render_svg(
    grid: OccupancyGrid,
    trajectory: Optional[Iterable[Sequence[float]]] = None,
    graph=None,
    nodes: Sequence = (),
    scale: float = 4.0,
) -> str:
    """Map raster with optional graph overlay and trajectory.

    ``trajectory`` holds world-frame ``(x, y, ...)`` poses. A trajectory gets
    exactly one start circle and one end star.
    """
    w, h = grid.width, grid.height
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * scale:g}" height="{h * scale:g}" '
        f'viewBox="0 0 {w} {h}" shape-rendering="crispEdges">'
    ]
    parts += _map_layer(grid)
    parts += _graph_layer(graph, nodes)
    if trajectory is not None:
        ox, oy = grid.origin
        res = grid.resolution
        pts = [((p[0] - ox) / res, (p[1] - oy) / res) for p in trajectory]
        if pts:
            line = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
            parts.append(f'<polyline points="{line}" fill="none" stroke="#d62728" stroke-width="0.5"/>')
            sx, sy = pts[0]
            parts.append(f'<circle class="start" cx="{sx:.3f}" cy="{sy:.3f}" r="2" fill="#2ca02c"/>')
            parts.append(_star(pts[-1][0], pts[-1][1], 2.5))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
