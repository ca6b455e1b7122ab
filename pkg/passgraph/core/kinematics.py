from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from passgraph.core.state import (
    MAX_ACCELERATION,
    MAX_SPEED,
    FrameSeries,
    GameState,
    PassCategory,
    PitchSpec,
    PlayerState,
)
from passgraph.utils.errors import InvalidState, SeriesTooShort
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

SMOOTHING_WINDOW = 7

SHORT_PASS_M = 10.0
LONG_PASS_M = 34.0
FINAL_ZONE_M = 40.0
DIRECT_GAIN_M = 5.0


def normalize_position(pos, pitch: PitchSpec) -> tuple[float, float]:
    """
    Map pitch meters onto [-1, 1]^2.

    x is measured from the defending goal line, so (0, 0) is the corner
    behind the attacking team and (length/2, width/2) the centre spot.
    Off-pitch input maps outside the unit square; no clamping here.
    """
    x, y = pos
    return (2.0 * x / pitch.length - 1.0, 2.0 * y / pitch.width - 1.0)


def denormalize_position(unit_pos, pitch: PitchSpec) -> tuple[float, float]:
    u, v = unit_pos
    return ((u + 1.0) * pitch.length / 2.0, (v + 1.0) * pitch.width / 2.0)


def _rotate_player(player: PlayerState, pitch: PitchSpec) -> PlayerState:
    x, y = player.pos
    return replace(
        player,
        pos=(pitch.length - x, pitch.width - y),
        vel=(-player.vel[0], -player.vel[1]),
        acc=(-player.acc[0], -player.acc[1]),
    )


def canonicalize_state(state: GameState, pitch: PitchSpec) -> GameState:
    """
    Rotate a right-to-left attack by 180 degrees so every pass attacks +x.

    The rotation is the mirror x -> L - x followed by ``mirror_state`` across
    the long axis. Distances, pressure and lane traffic match the plain x
    mirror; signed angles keep their sign here, where the x mirror alone
    would negate them.
    """
    if state.attacking_left_to_right:
        return state
    bx, by = state.ball
    return replace(
        state,
        attackers=tuple(_rotate_player(p, pitch) for p in state.attackers),
        defenders=tuple(_rotate_player(p, pitch) for p in state.defenders),
        ball=(pitch.length - bx, pitch.width - by),
        attacking_left_to_right=True,
    )


def _mirror_player(player: PlayerState, pitch: PitchSpec) -> PlayerState:
    x, y = player.pos
    return replace(
        player,
        pos=(x, pitch.width - y),
        vel=(player.vel[0], -player.vel[1]),
        acc=(player.acc[0], -player.acc[1]),
    )


def mirror_state(state: GameState, pitch: PitchSpec) -> GameState:
    """Reflect the scene across the pitch's long axis (y -> width - y)."""
    bx, by = state.ball
    return replace(
        state,
        attackers=tuple(_mirror_player(p, pitch) for p in state.attackers),
        defenders=tuple(_mirror_player(p, pitch) for p in state.defenders),
        ball=(bx, pitch.width - by),
    )


def categorize_pass(state: GameState, pitch: PitchSpec | None = None) -> PassCategory:
    """
    Distance band, phase of play and direction of a labelled pass.

    Expects a canonical (left-to-right) state.
    """
    if state.receiver_id is None:
        raise InvalidState(f"pass {state.key} has no receiver to categorize")
    pitch = pitch or PitchSpec()
    px, py = state.passer.pos
    rx, ry = state.attacker(state.receiver_id).pos
    distance = float(np.hypot(rx - px, ry - py))
    if distance < SHORT_PASS_M:
        band = "short"
    elif distance < LONG_PASS_M:
        band = "middle"
    else:
        band = "long"
    phase = "chance_creation" if rx >= pitch.length - FINAL_ZONE_M else "build_up"
    gain = rx - px
    if gain >= DIRECT_GAIN_M:
        direction = "direct"
    elif gain > -DIRECT_GAIN_M:
        direction = "lateral"
    else:
        direction = "backward"
    return PassCategory(distance_band=band, phase=phase, direction=direction)


@dataclass(frozen=True)
class Kinematics:
    player_ids: tuple[str, ...]
    velocity: np.ndarray  # (frames, players, 2)
    acceleration: np.ndarray  # (frames, players, 2)

    def at(self, frame_index: int, player_id: str):
        j = self.player_ids.index(player_id)
        return (
            tuple(self.velocity[frame_index, j]),
            tuple(self.acceleration[frame_index, j]),
        )


def _clamp_rows(vectors: np.ndarray, limit: float) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=-1, keepdims=True)
    scale = np.where(norms > limit, limit / np.maximum(norms, 1e-300), 1.0)
    return vectors * scale


def compute_kinematics(
    series: FrameSeries, window: int = SMOOTHING_WINDOW
) -> Kinematics:
    """
    Velocity and acceleration for every player in every frame.

    Velocity is the central finite difference of position. It is smoothed
    with a centred moving average of ``window`` frames before being
    differenced again for acceleration. Both are capped at the PlayerState
    limits.
    """
    if len(series.frames) < 3:
        raise SeriesTooShort(f"need at least 3 frames, got {len(series.frames)}")
    player_ids = tuple(sorted(series.frames[0].positions))
    for frame in series.frames:
        if set(frame.positions) != set(player_ids):
            raise InvalidState(
                f"frame at t={frame.timestamp} does not track the same players"
            )

    dt = 1.0 / series.rate_hz
    positions = np.array(
        [[frame.positions[pid] for pid in player_ids] for frame in series.frames],
        dtype=np.float64,
    )
    n_frames, n_players, _ = positions.shape

    velocity = np.gradient(positions, dt, axis=0)

    flat = pd.DataFrame(velocity.reshape(n_frames, n_players * 2))
    smoothed = (
        flat.rolling(window=window, center=True, min_periods=1)
        .mean()
        .to_numpy()
        .reshape(n_frames, n_players, 2)
    )
    acceleration = np.gradient(smoothed, dt, axis=0)

    logger.debug(
        "kinematics for %d players over %d frames at %.1f Hz",
        n_players,
        n_frames,
        series.rate_hz,
    )
    return Kinematics(
        player_ids=player_ids,
        velocity=_clamp_rows(velocity, MAX_SPEED),
        acceleration=_clamp_rows(acceleration, MAX_ACCELERATION),
    )
