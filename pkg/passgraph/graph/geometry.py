"""
Pressure, facing angle and passing-lane occlusion.

All inputs are in pitch meters. The vectorized ``*_many`` helpers are what
the graph builder and the synthetic expert use; the scalar functions are the
public single-pair forms.
"""

import math
from dataclasses import dataclass

import numpy as np

from passgraph.utils.errors import ConfigError, DegenerateFacing

FACING_EPS = 1e-6
ATTACK_DIRECTION = np.array([1.0, 0.0])


@dataclass(frozen=True)
class GeometryConfig:
    pressure_radius: float = 5.0
    cone_width: float = 0.35  # radians, about 20 degrees
    occlusion_radius: float = 0.5

    def validate(self) -> "GeometryConfig":
        if not self.pressure_radius > 0:
            raise ConfigError("pressure_radius", "must be > 0")
        if not 0 < self.cone_width < math.pi:
            raise ConfigError("cone_width", "must lie in (0, pi)")
        if not self.occlusion_radius > 0:
            raise ConfigError("occlusion_radius", "must be > 0")
        return self


def _positions(players) -> np.ndarray:
    if len(players) == 0:
        return np.zeros((0, 2))
    first = players[0]
    if hasattr(first, "pos"):
        return np.array([p.pos for p in players], dtype=np.float64)
    return np.asarray(players, dtype=np.float64).reshape(-1, 2)


def pressure_counts(points: np.ndarray, defenders: np.ndarray, radius: float):
    """Defenders within ``radius`` (inclusive) of every row of ``points``."""
    if defenders.shape[0] == 0:
        return np.zeros(points.shape[0], dtype=np.int64)
    diff = points[:, None, :] - defenders[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return (dist <= radius).sum(axis=1)


def pressure_count(player, defenders, radius: float) -> int:
    pos = np.asarray(getattr(player, "pos", player), dtype=np.float64)
    return int(pressure_counts(pos[None, :], _positions(defenders), radius)[0])


def facing_direction(passer_pos, ball_pos, passer_vel=None) -> np.ndarray:
    """
    Unit vector from ball to passer.

    Falls back to the passer's velocity direction, then to the attack
    direction (+x), when the ball sits on the passer.
    """
    u = np.asarray(passer_pos, dtype=np.float64) - np.asarray(ball_pos, np.float64)
    try:
        return _unit(u, "ball on passer")
    except DegenerateFacing:
        pass
    if passer_vel is not None:
        try:
            return _unit(np.asarray(passer_vel, dtype=np.float64), "passer standing")
        except DegenerateFacing:
            pass
    return ATTACK_DIRECTION.copy()


def _unit(vec: np.ndarray, reason: str) -> np.ndarray:
    norm = math.hypot(vec[0], vec[1])
    if norm < FACING_EPS:
        raise DegenerateFacing(reason)
    return vec / norm


def signed_angles(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """atan2(u x w, u . w) for every row of ``w``; -pi is reported as +pi."""
    cross = u[0] * w[:, 1] - u[1] * w[:, 0]
    dot = u[0] * w[:, 0] + u[1] * w[:, 1]
    theta = np.arctan2(cross, dot)
    return np.where(theta == -np.pi, np.pi, theta)


def signed_angle(passer_pos, ball_pos, target_pos, passer_vel=None) -> float:
    u = facing_direction(passer_pos, ball_pos, passer_vel)
    w = np.asarray(target_pos, np.float64) - np.asarray(passer_pos, np.float64)
    return float(signed_angles(u, w[None, :])[0])


def lane_traffic_many(
    passer_pos, targets: np.ndarray, defenders: np.ndarray, cone_width, radius
) -> np.ndarray:
    """
    Occluding defenders for the lane from the passer to every target row.

    A defender counts when its disc of ``radius`` touches the cone of
    angular width ``cone_width`` around the lane and it is no further than
    the target plus ``radius``. A defender whose disc covers the apex always
    counts.
    """
    n_targets = targets.shape[0]
    if defenders.shape[0] == 0 or n_targets == 0:
        return np.zeros(n_targets, dtype=np.int64)
    p = np.asarray(passer_pos, dtype=np.float64)
    w = targets - p  # (C, 2)
    t = defenders - p  # (K, 2)
    w_norm = np.hypot(w[:, 0], w[:, 1])  # (C,)
    t_norm = np.hypot(t[:, 0], t[:, 1])  # (K,)

    engulfed = t_norm <= radius
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_angle = (w @ t.T) / (w_norm[:, None] * t_norm[None, :])
        half_disc = np.arcsin(np.minimum(1.0, radius / t_norm))
    angle = np.arccos(np.clip(cos_angle, -1.0, 1.0))
    within_cone = angle - half_disc[None, :] <= cone_width / 2.0
    within_length = t_norm[None, :] <= w_norm[:, None] + radius
    counted = engulfed[None, :] | (within_cone & within_length)
    return counted.sum(axis=1)


def lane_traffic(passer_pos, target_pos, defenders, cone_width, radius) -> int:
    targets = np.asarray(target_pos, dtype=np.float64)[None, :]
    return int(
        lane_traffic_many(passer_pos, targets, _positions(defenders), cone_width, radius)[0]
    )
