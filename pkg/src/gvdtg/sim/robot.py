"""Rotate-then-translate unicycle following a waypoint list."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .. import kernels
from ..grid import OccupancyGrid
from ..planner import wrap_angle


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    theta: float
    v_max: float = 0.3
    omega_max: float = math.radians(17.1)

    @property
    def pose(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.theta)


@dataclass
class WaypointPath:
    points: list[tuple[float, float]] = field(default_factory=list)
    index: int = 0

    @property
    def done(self) -> bool:
        return self.index >= len(self.points)

    @property
    def current(self) -> Optional[tuple[float, float]]:
        return None if self.done else self.points[self.index]


@dataclass
class DriveResult:
    state: RobotState
    moved: float = 0.0
    replan: bool = False
    advanced: bool = False


def drive(
    state: RobotState,
    path: WaypointPath,
    dt: float,
    belief: Optional[OccupancyGrid] = None,
    heading_gate: float = math.radians(15.0),
    tolerance: float = 0.025,
) -> DriveResult:
    """One control interval toward ``path.current`` (mutates ``path.index``).

    The robot turns at most ``omega_max * dt``; it translates only while the
    remaining heading error is under ``heading_gate``, and then along the
    straight line to the waypoint so it never leaves the planned segment.
    With a belief map, a waypoint on a non-free cell or a blocked step
    returns ``replan=True`` without moving.
    """
    wp = path.current
    if wp is None:
        return DriveResult(state)
    dx, dy = wp[0] - state.x, wp[1] - state.y
    dist = math.hypot(dx, dy)
    if dist <= tolerance:
        path.index += 1
        return DriveResult(state, advanced=True)
    if belief is not None and not belief.is_free(belief.cell_of(*wp)):
        return DriveResult(state, replan=True)
    bearing = math.atan2(dy, dx)
    err = wrap_angle(bearing - state.theta)
    max_turn = state.omega_max * dt
    turn = max(-max_turn, min(max_turn, err))
    theta = wrap_angle(state.theta + turn)
    new = replace(state, theta=theta)
    if abs(wrap_angle(bearing - theta)) >= heading_gate:
        return DriveResult(new)
    step = min(state.v_max * dt, dist)
    nx = state.x + dx / dist * step
    ny = state.y + dy / dist * step
    if belief is not None:
        res = belief.resolution
        ox, oy = belief.origin
        if not kernels.segment_free(belief.cells, (state.x - ox) / res, (state.y - oy) / res,
                                    (nx - ox) / res, (ny - oy) / res):
            return DriveResult(new, replan=True)
    return DriveResult(replace(new, x=nx, y=ny), moved=step)
