"""
JSON-lines snapshot files.

Line 1 is a header carrying ``schema_version``; every following line is one
GameState. Writing is the exact inverse of reading for generator output.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from passgraph.core.state import GameState, PitchSpec, Role, clamp_player
from passgraph.utils.errors import (
    InvalidState,
    MalformedLine,
    MissingPathError,
    SchemaVersionUnsupported,
    TooManyErrors,
)
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

SCHEMA_VERSION = 1
FORMAT_TAG = "passgraph-snapshots"
MAX_ERROR_RATE = 0.01

STATE_FIELDS = {
    "frame_id",
    "timestamp",
    "pass_id",
    "passer_id",
    "receiver_id",
    "pass_successful",
    "pass_label",
    "attacking_left_to_right",
    "video_ref",
    "ball",
    "attackers",
    "defenders",
}
PLAYER_FIELDS = {"id", "x", "y", "vx", "vy", "ax", "ay", "role"}


def _player_record(player) -> dict:
    return {
        "id": player.id,
        "x": player.pos[0],
        "y": player.pos[1],
        "vx": player.vel[0],
        "vy": player.vel[1],
        "ax": player.acc[0],
        "ay": player.acc[1],
        "role": player.role.value,
    }


def state_record(state: GameState) -> dict:
    return {
        "frame_id": state.frame_id,
        "timestamp": state.timestamp,
        "pass_id": state.pass_id,
        "passer_id": state.passer_id,
        "receiver_id": state.receiver_id,
        "pass_successful": state.pass_successful,
        "pass_label": state.pass_label,
        "attacking_left_to_right": state.attacking_left_to_right,
        "video_ref": state.video_ref,
        "ball": list(state.ball),
        "attackers": [_player_record(p) for p in state.attackers],
        "defenders": [_player_record(p) for p in state.defenders],
    }


def write_snapshots(
    states: Iterable[GameState], path: str | Path, pitch: PitchSpec | None = None
) -> Path:
    pitch = pitch or PitchSpec()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "schema_version": SCHEMA_VERSION,
        "format": FORMAT_TAG,
        "pitch": {"length": pitch.length, "width": pitch.width},
    }
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(header) + "\n")
        for state in states:
            f.write(json.dumps(state_record(state)) + "\n")
            count += 1
    logger.info("Wrote %d snapshots to %s", count, path)
    return path


@dataclass
class IngestResult:
    states: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # MalformedLine
    data_lines: int = 0
    unknown_fields: set = field(default_factory=set)


def _parse_player(raw: dict, pitch: PitchSpec, unknown: set, prefix: str):
    unknown.update(f"{prefix}.{k}" for k in set(raw) - PLAYER_FIELDS)
    return clamp_player(
        id=raw["id"],
        pos=(raw["x"], raw["y"]),
        vel=(raw.get("vx", 0.0), raw.get("vy", 0.0)),
        acc=(raw.get("ax", 0.0), raw.get("ay", 0.0)),
        role=Role.parse(raw.get("role")),
        pitch=pitch,
    )


def parse_state(raw: dict, pitch: PitchSpec, unknown: set) -> GameState:
    if not isinstance(raw, dict):
        raise InvalidState("record is not a JSON object")
    unknown.update(set(raw) - STATE_FIELDS)
    return GameState(
        frame_id=raw["frame_id"],
        timestamp=raw["timestamp"],
        attackers=[_parse_player(p, pitch, unknown, "attackers") for p in raw["attackers"]],
        defenders=[_parse_player(p, pitch, unknown, "defenders") for p in raw["defenders"]],
        ball=tuple(raw["ball"]),
        passer_id=raw["passer_id"],
        receiver_id=raw.get("receiver_id"),
        pass_successful=raw.get("pass_successful"),
        pass_label=raw.get("pass_label"),
        pass_id=raw.get("pass_id"),
        attacking_left_to_right=raw.get("attacking_left_to_right", True),
        video_ref=raw.get("video_ref"),
    )


def _read_header(line: bytes, path: Path) -> PitchSpec:
    try:
        header = json.loads(line.decode("utf-8"))
        version = header["schema_version"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise SchemaVersionUnsupported(f"{path}: line 1 is not a snapshot header") from e
    if version != SCHEMA_VERSION:
        raise SchemaVersionUnsupported(
            f"{path}: schema_version {version}, supported {SCHEMA_VERSION}"
        )
    pitch = header.get("pitch") or {}
    try:
        return PitchSpec(**pitch) if pitch else PitchSpec()
    except TypeError as e:
        raise SchemaVersionUnsupported(f"{path}: unsupported pitch header {pitch!r}") from e


def read_snapshots(
    path: str | Path, max_error_rate: float = MAX_ERROR_RATE
) -> IngestResult:
    """
    Parse a snapshot file, collecting per-line errors. Raises TooManyErrors
    when more than ``max_error_rate`` of the data lines are invalid.
    """
    path = Path(path)
    if not path.exists():
        raise MissingPathError(path, "snapshot file")
    result = IngestResult()
    with path.open("rb") as f:
        first = f.readline()
        if not first.strip():
            raise SchemaVersionUnsupported(f"{path}: missing header line")
        pitch = _read_header(first, path)
        for line_number, line in enumerate(f, start=2):
            if not line.strip():
                continue
            result.data_lines += 1
            try:
                raw = json.loads(line.decode("utf-8"))
                result.states.append(parse_state(raw, pitch, result.unknown_fields))
            except UnicodeDecodeError as e:
                result.errors.append(MalformedLine(line_number, f"invalid UTF-8: {e.reason}"))
            except json.JSONDecodeError as e:
                result.errors.append(MalformedLine(line_number, f"invalid JSON: {e.msg}"))
            except KeyError as e:
                result.errors.append(MalformedLine(line_number, f"missing field {e}"))
            except (InvalidState, TypeError, ValueError) as e:
                result.errors.append(MalformedLine(line_number, str(e)))

    if result.unknown_fields:
        logger.warning("%s: ignored unknown fields %s", path, sorted(result.unknown_fields))
    if result.errors:
        if len(result.errors) > max_error_rate * result.data_lines:
            logger.error(
                "%s: %d of %d lines invalid", path, len(result.errors), result.data_lines
            )
            raise TooManyErrors(result.errors, result.data_lines)
        logger.warning(
            "%s: skipped %d invalid line(s), first: %s",
            path,
            len(result.errors),
            result.errors[0],
        )
    if result.data_lines == 0:
        logger.warning("%s: no snapshots after the header", path)
    return result


def ingest(path: str | Path, max_error_rate: float = MAX_ERROR_RATE) -> list[GameState]:
    return read_snapshots(path, max_error_rate).states
