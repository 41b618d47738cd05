"""Topological graph: construction, component repair, shortest paths."""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import kernels
from ..grid import Cell, OccupancyGrid, supercover
from ..kernels import FREE
from .cache import ConnectivityCache
from .kdtree import KDTree

# coincident nodes still get a strictly positive edge weight
MIN_WEIGHT = 1e-6


class UnreachableError(ValueError):
    pass


@dataclass(frozen=True)
class TopoNode:
    id: int
    x: int
    y: int
    kind: str  # "gvd" or "center"
    radius: float = 0.0

    @property
    def cell(self) -> Cell:
        return (self.x, self.y)


@dataclass
class Edge:
    a: int
    b: int
    weight: float
    kind: str  # "straight", "gvd-chain" or "astar"
    path: Optional[list[Cell]] = None

    def cells(self, graph: "TopoGraph") -> list[Cell]:
        if self.path is not None:
            return self.path
        return supercover(graph.nodes[self.a].cell, graph.nodes[self.b].cell)


@dataclass
class TopoGraph:
    nodes: list[TopoNode] = field(default_factory=list)
    edges: dict[tuple[int, int], Edge] = field(default_factory=dict)
    adj: dict[int, dict[int, float]] = field(default_factory=dict)
    labels: dict[int, int] = field(default_factory=dict)
    isolated: set[int] = field(default_factory=set)

    def add_node(self, x: int, y: int, kind: str, radius: float = 0.0) -> int:
        nid = len(self.nodes)
        self.nodes.append(TopoNode(nid, int(x), int(y), kind, float(radius)))
        self.adj[nid] = {}
        return nid

    def add_edge(self, a: int, b: int, weight: float, kind: str, path=None) -> Edge:
        if a == b:
            raise ValueError("self-loop")
        key = (a, b) if a < b else (b, a)
        weight = max(float(weight), MIN_WEIGHT)
        old = self.edges.get(key)
        if old is not None and old.weight <= weight:
            return old
        e = Edge(key[0], key[1], weight, kind, path)
        self.edges[key] = e
        self.adj[a][b] = weight
        self.adj[b][a] = weight
        return e

    def edge(self, a: int, b: int) -> Edge:
        return self.edges[(a, b) if a < b else (b, a)]

    def components(self) -> list[list[int]]:
        seen = set()
        out = []
        for n in range(len(self.nodes)):
            if n in seen:
                continue
            comp = []
            stack = [n]
            seen.add(n)
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in self.adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            out.append(sorted(comp))
        return out

    def component_of(self) -> dict[int, int]:
        out = {}
        for i, comp in enumerate(self.components()):
            for n in comp:
                out[n] = i
        return out

    def gvd_ids(self) -> list[int]:
        return [n.id for n in self.nodes if n.kind == "gvd"]

    def center_ids(self) -> list[int]:
        return [n.id for n in self.nodes if n.kind == "center"]

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": n.id, "x": n.x, "y": n.y, "kind": n.kind} for n in self.nodes],
            "edges": [
                {"a": e.a, "b": e.b, "w": round(e.weight, 6), "kind": e.kind}
                for _, e in sorted(self.edges.items())
            ],
            "labels": [{"point_id": p, "center_id": c} for p, c in sorted(self.labels.items())],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def build_graph(gvd_nodes, centers, labels) -> TopoGraph:
    """GVD nodes take ids ``0..n-1``; cluster centres follow."""
    g = TopoGraph()
    for n in gvd_nodes:
        g.add_node(n.x, n.y, "gvd", n.radius)
    base = len(g.nodes)
    for c in np.asarray(centers).reshape(-1, 2):
        g.add_node(int(c[0]), int(c[1]), "center")
    for i, lab in enumerate(labels):
        g.labels[i] = base + int(lab)
    return g


def _astar_edge(grid: OccupancyGrid, a: Cell, b: Cell):
    length, px, py = kernels.bidir_astar(grid.cells == FREE, a[0], a[1], b[0], b[1])
    if length < 0:
        return None
    return float(length), [(int(x), int(y)) for x, y in zip(px, py)]


def add_straight_edges(graph: TopoGraph, grid: OccupancyGrid, cache: ConnectivityCache, edge_radius: float,
                       leaf_capacity: int = 16) -> int:
    """Edge between every node pair within ``edge_radius`` that sees each other.

    The all-pairs sweep runs in one compiled pass; per-pair memo lookups
    would cost more than the segment walks they save.
    """
    if not graph.nodes:
        return 0
    xs = np.array([n.x for n in graph.nodes], dtype=np.int64)
    ys = np.array([n.y for n in graph.nodes], dtype=np.int64)
    pairs = kernels.visible_pairs(grid.cells, xs, ys, float(edge_radius))
    nodes = graph.nodes
    for i, j in pairs.tolist():
        graph.add_edge(i, j, math.hypot(nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y), "straight")
    return len(pairs)


def _gvd_chain(graph: TopoGraph, comp: set[int], grid: OccupancyGrid, cache: ConnectivityCache,
               edge_radius: float, gvd_tree, gvd_ids: np.ndarray, r_max: float):
    """Uniform-cost search over GVD adjacency from ``comp`` to any other component."""
    starts = [i for i in comp if graph.nodes[i].kind == "gvd"]
    if not starts:
        return None
    dist = {s: 0.0 for s in starts}
    prev: dict[int, int] = {}
    heap = [(0.0, s) for s in sorted(starts)]
    heapq.heapify(heap)
    done = set()
    reach = max(edge_radius, 2.0 * r_max)
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u not in comp:
            chain = [u]
            while chain[-1] in prev:
                chain.append(prev[chain[-1]])
            return chain[::-1]
        nu = graph.nodes[u]
        for k in gvd_tree.radius_query((nu.x, nu.y), reach):
            v = int(gvd_ids[k])
            if v == u or v in done:
                continue
            nv = graph.nodes[v]
            sep = math.hypot(nu.x - nv.x, nu.y - nv.y)
            adjacent = sep < nu.radius + nv.radius or (
                sep <= edge_radius and cache.connected(grid, nu.cell, nv.cell)
            )
            if not adjacent:
                continue
            nd = d + sep
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    return None


def connect_components(
    graph: TopoGraph,
    grid: OccupancyGrid,
    cache: ConnectivityCache,
    edge_radius: float,
    leaf_capacity: int = 16,
) -> TopoGraph:
    """Add visibility edges, then bridge components smallest-first.

    Bridging tries a chain of adjacent GVD nodes first and falls back to a
    grid A* between the closest node pair. A component that neither route
    can reach is marked isolated and skipped for the rest of the call.
    """
    add_straight_edges(graph, grid, cache, edge_radius, leaf_capacity)
    gvd_ids = np.array(graph.gvd_ids(), dtype=np.int64)
    gvd_tree = KDTree(np.array([graph.nodes[i].cell for i in gvd_ids], dtype=np.float64).reshape(-1, 2),
                      leaf_capacity)
    r_max = max((graph.nodes[i].radius for i in gvd_ids), default=0.0)
    given_up: set[int] = set()
    while True:
        comps = graph.components()
        if len(comps) <= 1:
            break
        active = [c for c in comps if c[0] not in given_up]
        if len(active) <= 1 and len(comps) - len(active) >= 1 and given_up:
            # whatever is left could only be joined to components already given up on
            break
        small = min(active, key=lambda c: (len(c), c[0]))
        comp = set(small)
        chain = _gvd_chain(graph, comp, grid, cache, edge_radius, gvd_tree, gvd_ids, r_max)
        if chain is not None and _add_chain(graph, chain, grid, cache):
            continue
        if _astar_bridge(graph, comp, grid):
            continue
        given_up.add(small[0])
    comps = graph.components()
    graph.isolated = set()
    if len(comps) > 1:
        for c in comps:
            graph.isolated.update(c)
    return graph


def _add_chain(graph: TopoGraph, chain: Sequence[int], grid: OccupancyGrid, cache: ConnectivityCache) -> bool:
    links = []
    for u, v in zip(chain, chain[1:]):
        a, b = graph.nodes[u], graph.nodes[v]
        if cache.connected(grid, a.cell, b.cell):
            links.append((u, v, math.hypot(a.x - b.x, a.y - b.y), None))
            continue
        got = _astar_edge(grid, a.cell, b.cell)
        if got is None:
            return False
        links.append((u, v, got[0], got[1]))
    for u, v, w, path in links:
        graph.add_edge(u, v, w, "gvd-chain", path)
    return True


def _astar_bridge(graph: TopoGraph, comp: set[int], grid: OccupancyGrid) -> bool:
    inside = sorted(comp)
    outside = [i for i in range(len(graph.nodes)) if i not in comp]
    if not outside:
        return False
    a = np.array([graph.nodes[i].cell for i in inside], dtype=np.float64)
    b = np.array([graph.nodes[i].cell for i in outside], dtype=np.float64)
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    ia, ib = np.unravel_index(int(np.argmin(d)), d.shape)
    u, v = inside[ia], outside[ib]
    got = _astar_edge(grid, graph.nodes[u].cell, graph.nodes[v].cell)
    if got is None:
        return False
    graph.add_edge(u, v, got[0], "astar", got[1])
    return True


def _key(cost: float, hops: int, path: tuple) -> tuple:
    return (round(cost, 9), hops, path)


def shortest_paths(graph: TopoGraph, source: int) -> dict[int, tuple[float, tuple[int, ...]]]:
    """Uniform-cost search; ties go to fewer hops, then lexicographic node ids."""
    best: dict[int, tuple] = {}
    heap = [(_key(0.0, 0, (source,)), 0.0, source)]
    while heap:
        key, cost, u = heapq.heappop(heap)
        if u in best:
            continue
        best[u] = (cost, key[2])
        path = key[2]
        for v, w in graph.adj[u].items():
            if v in best:
                continue
            nc = cost + w
            heapq.heappush(heap, (_key(nc, len(path), path + (v,)), nc, v))
    return best


def topo_path(graph: TopoGraph, a: int, b: int, table=None):
    """``(path, T, N)``: node sequence, total weight, intermediate node count."""
    table = table if table is not None else shortest_paths(graph, a)
    if b not in table:
        raise UnreachableError(f"unreachable: nodes {a} and {b} are in different components")
    cost, path = table[b]
    return list(path), cost, max(len(path) - 2, 0)
