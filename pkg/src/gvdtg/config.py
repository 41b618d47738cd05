"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .gvd import SamplingParams
from .planner import CostParams


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class Config:
    seed: int = 0
    method: str = "gvd-tg"

    # sampling
    r_min: int = 2
    delta_r: int = 1
    delta: float = 1.0
    step_high: int = 2
    step_low: int = 6
    local_range_m: float = 5.0
    d_o_threshold: float = 3.0
    snap_radius: int = 2
    unknown_is_obstacle: bool = True

    # denoising
    denoise_vote: str = "free"
    denoise_scope: str = "crop"

    # clustering and graph
    quantile: float = 0.3
    bandwidth_max_points: int = 2000
    eps_conv: float = 0.1
    max_iters: int = 50
    eps_merge_factor: float = 0.5
    edge_radius_factor: float = 2.0
    cache_capacity: int = 1 << 18
    leaf_capacity: int = 16

    # frontier test
    min_contact: int = 5
    max_obstacle_fraction: float = 0.8

    # cost
    alpha: float = 0.1
    beta: float = 0.05
    gamma: float = 0.9

    # sensor
    fov_deg: float = 270.0
    range_m: float = 3.5
    beams: int = 360
    range_noise_std: float = 0.0

    # robot
    v_max: float = 0.3
    omega_max_deg: float = 17.1
    heading_gate_deg: float = 15.0
    waypoint_tol_cells: float = 0.5
    dt: float = 0.1

    # episode
    budget: int = 20000
    coverage_goal: float = 0.95
    pipeline_every_n_steps: int = 20
    start_x: float = math.nan
    start_y: float = math.nan
    start_theta: float = 0.0

    def sampling(self) -> SamplingParams:
        return SamplingParams(
            r_min=self.r_min,
            delta_r=self.delta_r,
            delta=self.delta,
            step_high=self.step_high,
            step_low=self.step_low,
            local_range_m=self.local_range_m,
            d_o_threshold=self.d_o_threshold,
            snap_radius=self.snap_radius,
            unknown_is_obstacle=self.unknown_is_obstacle,
        )

    def cost(self) -> CostParams:
        return CostParams(self.alpha, self.beta)

    def replace(self, **kw) -> "Config":
        return dataclasses.replace(self, **kw)

    def dumps(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in dataclasses.fields(self))


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(kind, raw: str, line: int, key: str):
    try:
        if kind in (bool, "bool"):
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {key}", line) from None


def parse_config(text: str, base: Config | None = None) -> Config:
    cfg = dataclasses.replace(base) if base is not None else Config()
    kinds = {f.name: f.type for f in dataclasses.fields(Config)}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", no)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"unknown key {key!r}", no)
        setattr(cfg, key, _coerce(kinds[key], value, no, key))
    return cfg


def load_config(path, base: Config | None = None) -> Config:
    return parse_config(Path(path).read_text(), base)
