"""Compiled kernels vs the pure-Python fallback.

    python benchmarks/bench_kernels.py [--quick]

Each mode runs in its own interpreter because GVDTG_NUMBA is read at import.
The compiled timings exclude JIT warm-up (one untimed call first).
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r'''
import json, sys, time
import numpy as np
from gvdtg import kernels as k
from gvdtg.config import Config
from gvdtg.sim import load_world, run_episode
from gvdtg.topology.kdtree import KDTree

quick = sys.argv[1] == "1"
room = sys.argv[2]
rng = np.random.default_rng(0)
cells = np.where(rng.random((200, 200)) < 0.05, 2, 1).astype(np.uint8)
free = cells == 1
ys, xs = np.nonzero(free)
pts = np.stack([xs[:400], ys[:400]], axis=1).astype(np.float64)
tree = KDTree(pts, 16)
ang = np.linspace(-np.pi, np.pi, 360, endpoint=False)

cases = {
    "los_many x2000": lambda: k.los_many(cells, xs[0], ys[0], xs[:2000], ys[:2000]),
    "shift_all 400 pts": lambda: k.shift_all(cells, pts, *tree.flat(), 12.0, 0.1, 50),
    "visible_pairs 300": lambda: k.visible_pairs(cells, xs[:300], ys[:300], 20.0),
    "scan 360 beams": lambda: k.scan_all(cells, 100.5, 100.5, ang, 70.0),
    "bidir_astar": lambda: k.bidir_astar(free, xs[0], ys[0], xs[-1], ys[-1]),
}
if not quick:
    world = load_world(room)
    cases["episode empty_room"] = lambda: run_episode(world, Config(seed=0))

out = {}
for name, fn in cases.items():
    if k.USE_NUMBA:
        fn()
    t0 = time.perf_counter()
    fn()
    out[name] = time.perf_counter() - t0
print(json.dumps(out))
'''


def run(flag: str, quick: bool, room: str) -> dict:
    env = dict(os.environ, GVDTG_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", WORKER, "1" if quick else "0", room],
                         env=env, check=True, capture_output=True, text=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="skip the full episode")
    args = ap.parse_args()
    here = os.path.dirname(os.path.abspath(__file__))
    room = os.path.join(here, "..", "tests", "fixtures", "empty_room.txt")
    t0 = time.perf_counter()
    fast = run("1", args.quick, room)
    slow = run("0", args.quick, room)
    print(f"{'case':<22} {'numba (s)':>11} {'python (s)':>11} {'speedup':>9}")
    for name in fast:
        f, s = fast[name], slow[name]
        print(f"{name:<22} {f:>11.4f} {s:>11.4f} {s / f if f > 0 else float('inf'):>8.1f}x")
    print(f"total wall {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
