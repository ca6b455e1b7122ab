import numpy as np
import pytest

from passgraph.core.state import Role
from passgraph.evaluation.records import PredictionRecord
from passgraph.sql_pipeline.models import Pass
from passgraph.sql_pipeline.sql_utils import fetch_passer_counts, fetch_prediction_frame
from passgraph.sql_pipeline.store import open_store, read_records, stored_models, write_records
from passgraph.utils.errors import MissingPathError


def _records(rng, model="mpnn", n=25):
    out = []
    for i in range(n):
        k = int(rng.integers(2, 11))
        probs = rng.dirichlet(np.ones(k))
        chosen = int(rng.integers(k))
        out.append(
            PredictionRecord(
                pass_id=f"p{i:03d}",
                probabilities=tuple(probs),
                candidate_ids=tuple(f"A{j + 2}" for j in range(k)),
                true_index=chosen,
                chosen_index=chosen,
                pass_successful=bool(i % 4),
                passer_id=f"A{1 + i % 3}",
                passer_role=Role.DEFENDER if i % 2 else Role.WINGER,
                frame_id=i * 10,
                model=model,
                split=("train", "val", "test")[i % 3],
                distance_band="short",
                phase="build_up",
                direction="forward",
            )
        )
    return out


def test_round_trip_is_bit_exact(tmp_path, rng):
    db = tmp_path / "predictions.db"
    records = _records(rng)
    assert write_records(db, records) == len(records)
    loaded = read_records(db, "mpnn")
    assert loaded == records
    for a, b in zip(loaded, records):
        assert np.array(a.probabilities).tobytes() == np.array(b.probabilities).tobytes()


def test_filters_and_models(tmp_path, rng):
    db = tmp_path / "predictions.db"
    write_records(db, _records(rng, "mpnn") + _records(rng, "logreg"))
    assert stored_models(db) == ["logreg", "mpnn"]
    test_split = read_records(db, "logreg", split="test")
    assert {r.split for r in test_split} == {"test"}
    assert len(test_split) == 8


def test_overwrite_replaces_model_rows(tmp_path, rng):
    db = tmp_path / "predictions.db"
    write_records(db, _records(rng, n=10))
    fresh = _records(rng, n=4)
    write_records(db, fresh)
    assert read_records(db, "mpnn") == fresh


def test_append_skips_duplicates(tmp_path, rng):
    db = tmp_path / "predictions.db"
    first = _records(rng, n=5)
    write_records(db, first)
    write_records(db, first + _records(rng, n=8)[5:], overwrite=False)
    loaded = read_records(db, "mpnn")
    assert len(loaded) == 8
    assert loaded[:5] == first


def test_read_missing_store(tmp_path):
    with pytest.raises(MissingPathError):
        read_records(tmp_path / "missing.db")


def test_prediction_frame(tmp_path, rng):
    db = tmp_path / "predictions.db"
    records = _records(rng, n=12)
    write_records(db, records)
    engine, SessionLocal = open_store(db, create=False)
    with SessionLocal() as session:
        frame = fetch_prediction_frame(session, "mpnn")
        assert list(frame.index) == [r.pass_id for r in records]
        for r in records:
            row = frame.loc[r.pass_id]
            assert row["num_candidates"] == r.num_candidates
            assert row["chosen_probability"] == r.probabilities[r.chosen_index]
            assert row["top1_probability"] == max(r.probabilities)
        val = fetch_prediction_frame(session, "mpnn", split="val")
        assert set(val["split"]) == {"val"}
        frames = fetch_prediction_frame(session, "mpnn", extra_filters=[Pass.frame_id >= 60])
        assert len(frames) == 6
        assert fetch_prediction_frame(session, "nothing").empty
        counts = fetch_passer_counts(session, "mpnn")
        assert counts["passes"].sum() == 12
        assert counts.loc["A1", "completed"] == sum(
            r.pass_successful for r in records if r.passer_id == "A1"
        )
    engine.dispose()
