"""Scenario x method x seed benchmark runs and their aggregates."""
from __future__ import annotations

import csv
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .config import Config
from .sim.episode import EpisodeMetrics, run_episode
from .sim.world import World

log = logging.getLogger(__name__)

ROW_FIELDS = ("world", "method", "seed", *EpisodeMetrics.CSV_FIELDS, "error")
AGG_FIELDS = ("world", "method", "runs", "successes", "time_mean", "time_std", "distance_mean",
              "distance_std", "revisit_mean")


@dataclass
class BenchRow:
    world: str
    method: str
    seed: int
    metrics: Optional[EpisodeMetrics]
    error: str = ""

    @property
    def success(self) -> bool:
        return self.metrics is not None and self.metrics.success

    def as_dict(self) -> dict:
        d = {"world": self.world, "method": self.method, "seed": self.seed, "error": self.error}
        if self.metrics is not None:
            d.update(self.metrics.row())
        else:
            d.update({k: "" for k in EpisodeMetrics.CSV_FIELDS})
            d["success"] = 0
        return d


@dataclass
class Aggregate:
    world: str
    method: str
    runs: int
    successes: int
    time_mean: float
    time_std: float
    distance_mean: float
    distance_std: float
    revisit_mean: float

    def as_dict(self) -> dict:
        return {
            "world": self.world,
            "method": self.method,
            "runs": self.runs,
            "successes": self.successes,
            "time_mean": f"{self.time_mean:.4f}",
            "time_std": f"{self.time_std:.4f}",
            "distance_mean": f"{self.distance_mean:.4f}",
            "distance_std": f"{self.distance_std:.4f}",
            "revisit_mean": f"{self.revisit_mean:.6f}",
        }


def _std(xs: Sequence[float]) -> float:
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def aggregate(rows: Sequence[BenchRow]) -> list[Aggregate]:
    """Mean/std per (world, method) over the rows that produced metrics."""
    keys = []
    for r in rows:
        if (r.world, r.method) not in keys:
            keys.append((r.world, r.method))
    out = []
    for world, method in keys:
        group = [r for r in rows if r.world == world and r.method == method]
        done = [r.metrics for r in group if r.metrics is not None]
        times = [m.sim_time for m in done]
        dists = [m.distance for m in done]
        revs = [m.revisit_ratio for m in done]
        nan = float("nan")
        out.append(Aggregate(
            world, method, len(group), sum(r.success for r in group),
            statistics.fmean(times) if times else nan, _std(times),
            statistics.fmean(dists) if dists else nan, _std(dists),
            statistics.fmean(revs) if revs else nan,
        ))
    return out


@dataclass
class BenchmarkReport:
    rows: list[BenchRow] = field(default_factory=list)

    @property
    def aggregates(self) -> list[Aggregate]:
        return aggregate(self.rows)

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=ROW_FIELDS, lineterminator="\n")
            w.writeheader()
            for r in self.rows:
                w.writerow(r.as_dict())
        with open(out / "aggregate.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=AGG_FIELDS, lineterminator="\n")
            w.writeheader()
            for a in self.aggregates:
                w.writerow(a.as_dict())

    def table(self) -> str:
        head = f"{'world':<12} {'method':<8} {'ok':>7} {'time(s)':>16} {'distance(m)':>16} {'revisit':>8}"
        lines = [head, "-" * len(head)]
        for a in self.aggregates:
            lines.append(
                f"{a.world:<12} {a.method:<8} {a.successes:>3}/{a.runs:<3} "
                f"{a.time_mean:>8.1f} ±{a.time_std:<6.1f} {a.distance_mean:>8.2f} ±{a.distance_std:<6.2f} "
                f"{a.revisit_mean:>8.4f}"
            )
        return "\n".join(lines)

    def backtracking_summary(self, reference: str = "gvd-tg", baseline: str = "greedy",
                             distance_slack: float = 1.1, min_worlds: int = 3) -> dict:
        """Revisit and distance comparison of ``reference`` against ``baseline``.

        Revisit is compared world by world. Distance compares the reference
        mean over all its runs with ``distance_slack`` times the baseline's
        smallest world mean.
        """
        by = {(a.world, a.method): a for a in self.aggregates}
        per_world = {}
        for a in self.aggregates:
            if a.method != reference or (a.world, baseline) not in by:
                continue
            base = by[(a.world, baseline)]
            per_world[a.world] = {
                "revisit": (a.revisit_mean, base.revisit_mean),
                "revisit_ok": a.revisit_mean <= base.revisit_mean,
                "distance": (a.distance_mean, base.distance_mean),
            }
        ref_d = [r.metrics.distance for r in self.rows
                 if r.method == reference and r.metrics is not None and r.world in per_world]
        base_best = min((v["distance"][1] for v in per_world.values()), default=float("nan"))
        ref_mean = statistics.fmean(ref_d) if ref_d else float("nan")
        wins = sum(v["revisit_ok"] for v in per_world.values())
        return {
            "worlds": per_world,
            "revisit_wins": wins,
            "revisit_ok": wins >= min(min_worlds, len(per_world)) and bool(per_world),
            "distance_mean": ref_mean,
            "baseline_best": base_best,
            "distance_ok": ref_mean <= distance_slack * base_best,
        }


def run_bench(worlds: Iterable[World], methods: Sequence[str], seeds: Sequence[int],
              config: Optional[Config] = None) -> BenchmarkReport:
    """Cross product of runs; a run that raises becomes a failed row."""
    base = config or Config()
    report = BenchmarkReport()
    for world in worlds:
        for method in methods:
            for seed in seeds:
                cfg = base.replace(seed=seed, method=method)
                try:
                    metrics = run_episode(world, cfg, method).metrics
                    report.rows.append(BenchRow(world.name, method, seed, metrics))
                except Exception as exc:  # recorded, the sweep goes on
                    log.exception("run %s/%s/%d failed", world.name, method, seed)
                    report.rows.append(BenchRow(world.name, method, seed, None, f"{type(exc).__name__}: {exc}"))
    return report
