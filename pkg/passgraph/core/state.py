"""
Immutable match-state types.

Positions are meters measured from the corner of the defending goal line
(x in [0, length], y in [0, width]); velocities are m/s and accelerations
m/s^2, as delivered by 25 Hz tracking.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping

from passgraph.utils.errors import InvalidState

MAX_SPEED = 13.0
MAX_ACCELERATION = 12.0
PITCH_PADDING = 5.0


class Role(str, Enum):
    GOALKEEPER = "Goalkeeper"
    DEFENDER = "Defender"
    MIDFIELDER = "Midfielder"
    WINGER = "Winger"
    FORWARD = "Forward"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, value) -> "Role":
        if isinstance(value, Role):
            return value
        if value is None:
            return cls.UNKNOWN
        for role in cls:
            if role.value.lower() == str(value).strip().lower():
                return role
        return cls.UNKNOWN


@dataclass(frozen=True)
class PitchSpec:
    length: float = 105.0
    width: float = 68.0

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise InvalidState(
                f"pitch dimensions must be positive, got {self.length}x{self.width}"
            )

    @property
    def diagonal(self) -> float:
        return math.hypot(self.length, self.width)

    def contains(self, pos, padding: float = PITCH_PADDING) -> bool:
        x, y = pos
        return (
            -padding <= x <= self.length + padding
            and -padding <= y <= self.width + padding
        )


def _pair(value, name: str) -> tuple[float, float]:
    try:
        x, y = value
        pair = (float(x), float(y))
    except (TypeError, ValueError) as e:
        raise InvalidState(f"{name} must be an (x, y) pair: {value!r}") from e
    if not all(math.isfinite(v) for v in pair):
        raise InvalidState(f"{name} must be finite: {pair}")
    return pair


@dataclass(frozen=True)
class PlayerState:
    id: str
    pos: tuple[float, float]
    vel: tuple[float, float] = (0.0, 0.0)
    acc: tuple[float, float] = (0.0, 0.0)
    role: Role = Role.UNKNOWN

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "pos", _pair(self.pos, "pos"))
        object.__setattr__(self, "vel", _pair(self.vel, "vel"))
        object.__setattr__(self, "acc", _pair(self.acc, "acc"))
        object.__setattr__(self, "role", Role.parse(self.role))
        if math.hypot(*self.vel) > MAX_SPEED + 1e-9:
            raise InvalidState(f"player {self.id}: speed above {MAX_SPEED} m/s")
        if math.hypot(*self.acc) > MAX_ACCELERATION + 1e-9:
            raise InvalidState(
                f"player {self.id}: acceleration above {MAX_ACCELERATION} m/s^2"
            )


def _clamp_norm(vec, limit: float) -> tuple[float, float]:
    x, y = float(vec[0]), float(vec[1])
    norm = math.hypot(x, y)
    if norm <= limit:
        return (x, y)
    scale = limit / norm
    return (x * scale, y * scale)


def clamp_player(
    id,
    pos,
    vel=(0.0, 0.0),
    acc=(0.0, 0.0),
    role=Role.UNKNOWN,
    pitch: PitchSpec | None = None,
) -> PlayerState:
    """Ingestion policy: clip position to the padded pitch, cap speed and acceleration."""
    pitch = pitch or PitchSpec()
    x = min(max(float(pos[0]), -PITCH_PADDING), pitch.length + PITCH_PADDING)
    y = min(max(float(pos[1]), -PITCH_PADDING), pitch.width + PITCH_PADDING)
    return PlayerState(
        id=id,
        pos=(x, y),
        vel=_clamp_norm(vel, MAX_SPEED),
        acc=_clamp_norm(acc, MAX_ACCELERATION),
        role=role,
    )


@dataclass(frozen=True)
class PassCategory:
    distance_band: str
    phase: str
    direction: str

    def as_dict(self) -> dict:
        return {
            "distance_band": self.distance_band,
            "phase": self.phase,
            "direction": self.direction,
        }


@dataclass(frozen=True)
class GameState:
    frame_id: int
    timestamp: float
    attackers: tuple[PlayerState, ...]
    defenders: tuple[PlayerState, ...]
    ball: tuple[float, float]
    passer_id: str
    receiver_id: str | None = None
    pass_successful: bool | None = None
    pass_label: str | None = None
    pass_id: str | None = None
    attacking_left_to_right: bool = True
    video_ref: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "frame_id", int(self.frame_id))
        object.__setattr__(self, "timestamp", float(self.timestamp))
        object.__setattr__(self, "attackers", tuple(self.attackers))
        object.__setattr__(self, "defenders", tuple(self.defenders))
        object.__setattr__(self, "ball", _pair(self.ball, "ball"))
        object.__setattr__(self, "passer_id", str(self.passer_id))
        if self.receiver_id is not None:
            object.__setattr__(self, "receiver_id", str(self.receiver_id))
        if self.pass_successful is not None:
            object.__setattr__(self, "pass_successful", bool(self.pass_successful))
        self._validate()

    def _validate(self):
        if not 2 <= len(self.attackers) <= 11:
            raise InvalidState(f"need 2..11 attackers, got {len(self.attackers)}")
        if not 1 <= len(self.defenders) <= 11:
            raise InvalidState(f"need 1..11 defenders, got {len(self.defenders)}")
        attacker_ids = [p.id for p in self.attackers]
        defender_ids = [p.id for p in self.defenders]
        if len(set(attacker_ids)) != len(attacker_ids):
            raise InvalidState(f"duplicate attacker ids in frame {self.frame_id}")
        if len(set(defender_ids)) != len(defender_ids):
            raise InvalidState(f"duplicate defender ids in frame {self.frame_id}")
        if set(attacker_ids) & set(defender_ids):
            raise InvalidState(
                f"attacker and defender ids overlap in frame {self.frame_id}"
            )
        if attacker_ids.count(self.passer_id) != 1:
            raise InvalidState(f"passer {self.passer_id} not among attackers")
        if self.receiver_id is not None:
            if self.receiver_id == self.passer_id:
                raise InvalidState(f"receiver equals passer ({self.passer_id})")
            if self.receiver_id not in attacker_ids:
                raise InvalidState(f"receiver {self.receiver_id} not among attackers")

    @property
    def key(self) -> str:
        return self.pass_id if self.pass_id is not None else str(self.frame_id)

    @property
    def passer(self) -> PlayerState:
        return self.attacker(self.passer_id)

    def attacker(self, player_id: str) -> PlayerState:
        for player in self.attackers:
            if player.id == player_id:
                return player
        raise KeyError(player_id)

    def check_bounds(self, pitch: PitchSpec) -> None:
        for player in (*self.attackers, *self.defenders):
            if not pitch.contains(player.pos):
                raise InvalidState(
                    f"player {player.id} at {player.pos} outside padded pitch"
                )

    def with_receiver(self, receiver_id: str, successful: bool | None) -> "GameState":
        return replace(self, receiver_id=receiver_id, pass_successful=successful)


@dataclass(frozen=True)
class Frame:
    timestamp: float
    positions: Mapping[str, tuple[float, float]] = field(default_factory=dict)


@dataclass(frozen=True)
class FrameSeries:
    frames: tuple[Frame, ...]
    rate_hz: float = 25.0

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.rate_hz > 0:
            raise InvalidState(f"rate_hz must be positive, got {self.rate_hz}")
        stamps = [f.timestamp for f in self.frames]
        if any(b <= a for a, b in zip(stamps, stamps[1:])):
            raise InvalidState("frame timestamps must be strictly increasing")
