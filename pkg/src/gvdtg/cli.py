"""gvdtg command line: run, extract, bench."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .bench import run_bench
from .config import Config, ConfigError, load_config
from .grid import MapParseError, denoise, load_grid
from .gvd import sample_to_fixpoint, write_nodes_csv
from .render import render_svg
from .sim.episode import METHODS, EpisodeMetrics, run_episode
from .sim.world import BUNDLED, World, bundled_world, load_world
from .topology import ConnectivityCache, bandwidth, build_graph, connect_components, mean_shift

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("gvdtg")


class InputError(Exception):
    pass


def _world(arg: str) -> World:
    if arg in BUNDLED and not Path(arg).exists():
        return bundled_world(arg)
    if not Path(arg).is_file():
        raise InputError(f"world file not found: {arg}")
    return load_world(arg)


def _worlds(arg: str | None) -> list[World]:
    if arg is None:
        return [bundled_world(n) for n in BUNDLED]
    p = Path(arg)
    if p.is_dir():
        files = sorted(p.glob("*.txt"))
        if not files:
            raise InputError(f"no *.txt worlds in {arg}")
        return [load_world(f) for f in files]
    return [_world(s) for s in arg.split(",") if s]


def _config(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    if getattr(args, "budget", None) is not None:
        cfg = cfg.replace(budget=args.budget)
    return cfg


def _methods(arg: str) -> list[str]:
    out = [m.strip() for m in arg.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad or not out:
        raise InputError(f"unknown method(s) {bad or arg!r}; choose from {', '.join(METHODS)}")
    return out


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_run(args) -> int:
    world = _world(args.world)
    cfg = _config(args)
    method = _methods(args.methods)[0]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run_episode(world, cfg, method)
    m = res.metrics
    _write_csv(out / "metrics.csv", ("world", "method", "seed", *EpisodeMetrics.CSV_FIELDS),
               [(world.name, method, cfg.seed, *m.row().values())])
    _write_csv(out / "trajectory.csv", ("frame", "x", "y", "theta"),
               [(f, f"{x:.6f}", f"{y:.6f}", f"{t:.6f}") for f, x, y, t in m.trajectory])
    _write_csv(out / "decisions.csv", ("frame", "chosen_id", "cost", "branch", "n_candidates"),
               [(d.frame, d.chosen_id, f"{d.cost:.6f}", d.branch, d.n_candidates) for d in res.decisions])
    (out / "render.svg").write_text(render_svg(res.belief, [(x, y) for _, x, y, _ in m.trajectory], res.graph, res.nodes))
    print(f"{world.name} {method} seed={cfg.seed}: {'success' if m.success else 'failure'} ({m.reason}) "
          f"coverage={m.coverage:.3f} time={m.sim_time:.1f}s distance={m.distance:.2f}m "
          f"revisit={m.revisit_ratio:.4f}")
    return EXIT_OK if m.success else EXIT_FAIL


def extract(grid, cfg: Config):
    """Static-map pipeline: sampling to fixpoint, clustering and connection."""
    grid = denoise(grid, grid)  # nothing changed, so this is the identity
    nodes, _ = sample_to_fixpoint(grid, cfg.sampling(), seed=cfg.seed)
    graph = build_graph([], np.empty((0, 2), dtype=np.int64), np.empty(0, dtype=np.int64))
    if nodes:
        cache = ConnectivityCache(cfg.cache_capacity)
        pts = np.array([[n.x, n.y] for n in nodes], dtype=np.float64)
        r_m = max(bandwidth(pts, cfg.quantile, cfg.bandwidth_max_points, cfg.seed) if len(pts) > 1 else 1.0, 1.0)
        ms = mean_shift(pts, grid, cache, r_m, cfg.eps_conv, cfg.max_iters, cfg.eps_merge_factor * r_m,
                        cfg.leaf_capacity)
        graph = build_graph(nodes, ms.centers, ms.labels)
        connect_components(graph, grid, cache, cfg.edge_radius_factor * r_m, cfg.leaf_capacity)
    return grid, nodes, graph


def cmd_extract(args) -> int:
    if not Path(args.world).is_file():
        raise InputError(f"map file not found: {args.world}")
    grid = load_grid(args.world)
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid, nodes, graph = extract(grid, cfg)
    write_nodes_csv(nodes, out / "nodes.csv")
    (out / "graph.json").write_text(graph.dumps() + "\n")
    (out / "overlay.svg").write_text(render_svg(grid, None, graph, nodes))
    print(f"{len(nodes)} nodes, {len(graph.nodes)} graph nodes, {len(graph.edges)} edges, "
          f"{len(graph.components())} component(s)")
    return EXIT_OK


def cmd_bench(args) -> int:
    worlds = _worlds(args.world)
    methods = _methods(args.methods)
    if args.seeds < 1:
        raise InputError("--seeds must be >= 1")
    cfg = _config(args)
    report = run_bench(worlds, methods, range(args.seeds), cfg)
    report.write(args.out)
    print(report.table())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gvdtg", description="GVD-based topological exploration on occupancy grids")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one exploration episode")
    run.add_argument("--world", required=True, help="world file or bundled name (s1..s4)")
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--seed", type=int)
    run.add_argument("--budget", type=int, help="step budget")
    run.add_argument("--methods", default="gvd-tg", help="gvd-tg or greedy")
    run.set_defaults(func=cmd_run)

    ext = sub.add_parser("extract", help="GVD nodes and topology of a static map")
    ext.add_argument("--world", required=True, help="map file")
    ext.add_argument("--config")
    ext.add_argument("--out", default="out")
    ext.add_argument("--seed", type=int)
    ext.set_defaults(func=cmd_extract)

    bench = sub.add_parser("bench", help="worlds x methods x seeds")
    bench.add_argument("--world", help="directory of worlds or comma list (default: bundled s1..s4)")
    bench.add_argument("--config")
    bench.add_argument("--out", default="bench")
    bench.add_argument("--seeds", type=int, default=10, help="runs seeds 0..k-1")
    bench.add_argument("--methods", default=",".join(METHODS))
    bench.add_argument("--budget", type=int)
    bench.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    level = os.environ.get("GVDTG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MapParseError, ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        # bad start pose and similar input problems surface here
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
