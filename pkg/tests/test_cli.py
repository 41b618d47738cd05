import csv
import json
import statistics

import numpy as np
import pytest

from gvdtg.bench import BenchRow, aggregate, run_bench
from gvdtg.cli import main
from gvdtg.config import Config
from gvdtg.grid import FREE, OCCUPIED, OccupancyGrid, save_grid
from gvdtg.sim import World, load_world


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def room_run(tmp_path_factory, fixtures):
    out = tmp_path_factory.mktemp("run")
    code = main(["run", "--world", str(fixtures / "empty_room.txt"), "--out", str(out), "--seed", "7"])
    return code, out


def test_run_writes_artifacts(room_run):
    code, out = room_run
    assert code == 0
    for name in ("metrics.csv", "trajectory.csv", "decisions.csv", "render.svg"):
        assert (out / name).is_file()
    m = read_csv(out / "metrics.csv")
    assert len(m) == 1 and m[0]["success"] == "1" and m[0]["seed"] == "7"
    traj = read_csv(out / "trajectory.csv")
    assert list(traj[0]) == ["frame", "x", "y", "theta"]
    dec = read_csv(out / "decisions.csv")
    assert list(dec[0]) == ["frame", "chosen_id", "cost", "branch", "n_candidates"]
    assert {d["branch"] for d in dec} <= {"1", "2"}


def test_svg_markers(room_run):
    svg = (room_run[1] / "render.svg").read_text()
    assert svg.count('class="start"') == 1 and svg.count('class="end"') == 1
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_run_is_repeatable(room_run, tmp_path, fixtures):
    _, first = room_run
    assert main(["run", "--world", str(fixtures / "empty_room.txt"), "--out", str(tmp_path), "--seed", "7"]) == 0
    for name in ("metrics.csv", "trajectory.csv"):
        assert (tmp_path / name).read_bytes() == (first / name).read_bytes()


def test_malformed_header(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("GRID 10 x 0.05\n")
    assert main(["run", "--world", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "'x'" in capsys.readouterr().err


def test_missing_world(tmp_path, capsys):
    assert main(["run", "--world", str(tmp_path / "nope.txt"), "--out", str(tmp_path)]) == 2
    assert "not found" in capsys.readouterr().err


def test_bad_config_key(tmp_path, fixtures, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("alpha = 0.2\nwarp_speed = 9\n")
    assert main(["run", "--world", str(fixtures / "empty_room.txt"), "--config", str(cfg),
                 "--out", str(tmp_path)]) == 2
    assert "warp_speed" in capsys.readouterr().err


def test_start_in_wall_is_input_error(tmp_path, fixtures):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("start_x = 0.01\nstart_y = 0.01\n")
    assert main(["run", "--world", str(fixtures / "empty_room.txt"), "--config", str(cfg),
                 "--out", str(tmp_path)]) == 2


def test_small_budget_fails(tmp_path, fixtures):
    assert main(["run", "--world", str(fixtures / "empty_room.txt"), "--budget", "3",
                 "--out", str(tmp_path)]) == 1
    assert read_csv(tmp_path / "metrics.csv")[0]["success"] == "0"


def test_extract_all_occupied(tmp_path):
    g = OccupancyGrid(np.full((20, 20), OCCUPIED, dtype=np.uint8))
    save_grid(g, tmp_path / "solid.txt")
    assert main(["extract", "--world", str(tmp_path / "solid.txt"), "--out", str(tmp_path / "o")]) == 0
    assert read_csv(tmp_path / "o" / "nodes.csv") == []
    graph = json.loads((tmp_path / "o" / "graph.json").read_text())
    assert graph["nodes"] == [] and graph["edges"] == []


def test_extract_corridor(tmp_path, fixtures):
    out = tmp_path / "a"
    assert main(["extract", "--world", str(fixtures / "corridor.txt"), "--out", str(out)]) == 0
    nodes = read_csv(out / "nodes.csv")
    assert list(nodes[0]) == ["x", "y", "r", "frame"]
    assert sum(n["y"] == "15" for n in nodes) >= 5
    graph = json.loads((out / "graph.json").read_text())
    adj = {n["id"]: set() for n in graph["nodes"]}
    for e in graph["edges"]:
        adj[e["a"]].add(e["b"])
        adj[e["b"]].add(e["a"])
    seen, todo = set(), [next(iter(adj))]
    while todo:
        u = todo.pop()
        if u not in seen:
            seen.add(u)
            todo.extend(adj[u])
    assert seen == set(adj)
    again = tmp_path / "b"
    main(["extract", "--world", str(fixtures / "corridor.txt"), "--out", str(again)])
    for name in ("nodes.csv", "graph.json", "overlay.svg"):
        assert (again / name).read_bytes() == (out / name).read_bytes()


def test_bench_rows_and_aggregates(tmp_path, fixtures, capsys):
    out = tmp_path / "bench"
    code = main(["bench", "--world", str(fixtures / "empty_room.txt"), "--seeds", "3",
                 "--methods", "gvd-tg,greedy", "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "report.csv")
    aggs = read_csv(out / "aggregate.csv")
    assert len(rows) == 6 and len(aggs) == 2
    for a in aggs:
        mine = [r for r in rows if r["method"] == a["method"]]
        times = [float(r["sim_time"]) for r in mine]
        dists = [float(r["distance"]) for r in mine]
        assert float(a["time_mean"]) == pytest.approx(statistics.fmean(times), abs=1e-4)
        assert float(a["time_std"]) == pytest.approx(statistics.stdev(times), abs=1e-4)
        assert float(a["distance_mean"]) == pytest.approx(statistics.fmean(dists), abs=1e-4)
        assert float(a["distance_std"]) == pytest.approx(statistics.stdev(dists), abs=1e-4)
        assert int(a["runs"]) == 3
    assert "gvd-tg" in capsys.readouterr().out


def test_bench_unknown_method(tmp_path, capsys):
    assert main(["bench", "--methods", "tare", "--out", str(tmp_path)]) == 2
    assert "unknown method" in capsys.readouterr().err


def test_bench_records_failures():
    cells = np.full((30, 30), FREE, dtype=np.uint8)
    world = World(OccupancyGrid(cells, 0.05), "open")
    rep = run_bench([world], ["gvd-tg"], [0], Config(start_x=-5.0, start_y=-5.0))
    assert len(rep.rows) == 1 and rep.rows[0].error and not rep.rows[0].success
    assert rep.aggregates[0].successes == 0


def test_aggregate_single_run_has_zero_std():
    from gvdtg.sim.episode import EpisodeMetrics
    m = EpisodeMetrics(10, 1.0, 2.0, 0.96, 0.1, True)
    (a,) = aggregate([BenchRow("w", "greedy", 0, m)])
    assert a.time_std == 0.0 and a.distance_mean == 2.0
