import json

import pytest

from passgraph.data_acquisition.snapshots import (
    ingest,
    read_snapshots,
    state_record,
    write_snapshots,
)
from passgraph.synthetic.generator import GeneratorConfig, generate_dataset
from passgraph.utils.errors import MissingPathError, SchemaVersionUnsupported, TooManyErrors

HEADER = json.dumps({"schema_version": 1, "format": "passgraph-snapshots"})


@pytest.fixture(scope="module")
def states():
    return generate_dataset(GeneratorConfig(seed=4, n_passes=150))[0]


def _write_lines(path, records, header=HEADER):
    path.write_text(header + "\n" + "".join(json.dumps(r) + "\n" for r in records))
    return path


def test_round_trip(tmp_path, states):
    path = write_snapshots(states, tmp_path / "snap.jsonl")
    assert ingest(path) == states


def test_empty_after_header(tmp_path):
    path = _write_lines(tmp_path / "empty.jsonl", [])
    assert ingest(path) == []


def test_missing_file(tmp_path):
    with pytest.raises(MissingPathError):
        ingest(tmp_path / "nope.jsonl")


def test_receiver_equal_to_passer_is_rejected(tmp_path, states):
    records = [state_record(s) for s in states]
    records[41]["receiver_id"] = records[41]["passer_id"]
    result = read_snapshots(_write_lines(tmp_path / "bad.jsonl", records))
    assert len(result.states) == len(states) - 1
    assert [e.line_number for e in result.errors] == [43]
    assert "receiver equals passer" in str(result.errors[0])


def test_too_many_errors(tmp_path, states):
    records = [state_record(s) for s in states[:20]]
    records[3]["receiver_id"] = records[3]["passer_id"]
    del records[7]["attackers"]
    with pytest.raises(TooManyErrors) as info:
        read_snapshots(_write_lines(tmp_path / "bad.jsonl", records))
    assert [e.line_number for e in info.value.errors] == [5, 9]


def test_invalid_json_line(tmp_path, states):
    path = tmp_path / "broken.jsonl"
    lines = [json.dumps(state_record(s)) for s in states]
    lines[10] = lines[10][:-5]
    path.write_text(HEADER + "\n" + "\n".join(lines) + "\n")
    result = read_snapshots(path)
    assert result.errors[0].line_number == 12
    assert "invalid JSON" in str(result.errors[0])


def test_invalid_utf8_line(tmp_path, states):
    path = tmp_path / "latin.jsonl"
    lines = [json.dumps(state_record(s)).encode("utf-8") for s in states]
    lines[10] = b'{"bad": "\xff\xfe"}'
    path.write_bytes(HEADER.encode("utf-8") + b"\n" + b"\n".join(lines) + b"\n")
    result = read_snapshots(path)
    assert [e.line_number for e in result.errors] == [12]
    assert "invalid UTF-8" in str(result.errors[0])
    assert len(result.states) == len(states) - 1


def test_unsupported_schema(tmp_path):
    path = _write_lines(tmp_path / "v2.jsonl", [], header=json.dumps({"schema_version": 2}))
    with pytest.raises(SchemaVersionUnsupported):
        ingest(path)
    path.write_text("")
    with pytest.raises(SchemaVersionUnsupported):
        ingest(path)


def test_unknown_pitch_header_key(tmp_path):
    header = json.dumps({"schema_version": 1, "pitch": {"length": 105.0, "surface": "grass"}})
    path = _write_lines(tmp_path / "pitch.jsonl", [], header=header)
    with pytest.raises(SchemaVersionUnsupported, match="pitch"):
        ingest(path)
    path.write_bytes(b"\xff\xfe\n")
    with pytest.raises(SchemaVersionUnsupported):
        ingest(path)


def test_unknown_fields_are_ignored(tmp_path, states):
    record = state_record(states[0])
    record["weather"] = "rain"
    record["attackers"][0]["heart_rate"] = 150
    result = read_snapshots(_write_lines(tmp_path / "extra.jsonl", [record]))
    assert result.states == [states[0]]
    assert result.unknown_fields == {"weather", "attackers.heart_rate"}


def test_out_of_range_values_are_clamped(tmp_path, states):
    record = state_record(states[0])
    record["attackers"][0]["x"] = 200.0
    record["attackers"][0]["vx"] = 40.0
    (state,) = ingest(_write_lines(tmp_path / "clamp.jsonl", [record]))
    player = state.attackers[0]
    assert player.pos[0] == 110.0
    assert (player.vel[0] ** 2 + player.vel[1] ** 2) ** 0.5 == pytest.approx(13.0)
