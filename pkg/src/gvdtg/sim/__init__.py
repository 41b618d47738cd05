from .episode import METHODS, Decision, EpisodeMetrics, EpisodeResult, run_episode
from .robot import RobotState, WaypointPath, drive
from .sensor import Scan, SensorModel, integrate, scan
from .world import BUNDLED, World, bundled_world, load_world, reachable_free

__all__ = [
    "METHODS", "Decision", "EpisodeMetrics", "EpisodeResult", "run_episode", "RobotState", "WaypointPath",
    "drive", "Scan", "SensorModel", "integrate", "scan", "BUNDLED", "World", "bundled_world", "load_world",
    "reachable_free",
]
