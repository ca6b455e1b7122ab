from passgraph.core.kinematics import (
    canonicalize_state,
    categorize_pass,
    compute_kinematics,
    denormalize_position,
    mirror_state,
    normalize_position,
)
from passgraph.core.state import (
    Frame,
    FrameSeries,
    GameState,
    PassCategory,
    PitchSpec,
    PlayerState,
    Role,
    clamp_player,
)

__all__ = [
    "Frame",
    "FrameSeries",
    "GameState",
    "PassCategory",
    "PitchSpec",
    "PlayerState",
    "Role",
    "canonicalize_state",
    "categorize_pass",
    "clamp_player",
    "compute_kinematics",
    "denormalize_position",
    "mirror_state",
    "normalize_position",
]
