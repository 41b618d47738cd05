from .cache import ConnectivityCache, connected
from .graph import Edge, TopoGraph, TopoNode, UnreachableError, build_graph, connect_components, shortest_paths, topo_path
from .kdtree import KDTree
from .meanshift import InsufficientPointsError, MeanShiftResult, bandwidth, mean_shift

__all__ = [
    "ConnectivityCache", "connected", "Edge", "TopoGraph", "TopoNode", "UnreachableError", "build_graph",
    "connect_components", "shortest_paths", "topo_path", "KDTree", "InsufficientPointsError",
    "MeanShiftResult", "bandwidth", "mean_shift",
]
