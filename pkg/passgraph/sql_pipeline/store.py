"""
SQLite store for PredictionRecords.

``eval`` writes every model's records; ``report`` reads them back. Floats are
stored as SQLite REAL (IEEE double) so probabilities round-trip exactly.
"""

from pathlib import Path
from typing import Sequence

from sqlalchemy import create_engine, delete, select, text
from sqlalchemy.dialects.sqlite import insert as sqlite_insert
from sqlalchemy.orm import selectinload, sessionmaker

from passgraph.evaluation.records import PredictionRecord
from passgraph.sql_pipeline.models import Base, CandidateProbability, Pass
from passgraph.utils.errors import MissingPathError
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

SQLITE_MAX_VARS = 999


def sqlite_url(db_path: str | Path) -> str:
    return f"sqlite:///{Path(db_path)}"


def open_store(db_path: str | Path, create: bool = True):
    """Engine + session factory. Creates tables unless ``create`` is False."""
    db_path = Path(db_path)
    if not create and not db_path.exists():
        raise MissingPathError(db_path, "prediction store")
    db_path.parent.mkdir(parents=True, exist_ok=True)
    engine = create_engine(sqlite_url(db_path), echo=False)
    with engine.begin() as conn:
        conn.execute(text("PRAGMA synchronous = OFF"))
        conn.execute(text("PRAGMA temp_store = MEMORY"))
        if create:
            Base.metadata.create_all(conn)
    return engine, sessionmaker(bind=engine, autoflush=False)


def _pass_row(record: PredictionRecord) -> dict:
    return {
        "model_name": record.model,
        "pass_id": record.pass_id,
        "frame_id": record.frame_id,
        "passer_id": record.passer_id,
        "passer_role": record.passer_role.value,
        "pass_successful": bool(record.pass_successful),
        "true_index": record.true_index,
        "chosen_index": record.chosen_index,
        "split": record.split,
        "distance_band": record.distance_band,
        "phase": record.phase,
        "direction": record.direction,
    }


def _chunked_insert(session, table, mappings: list[dict], conflict=None):
    if not mappings:
        return
    cols = len(mappings[0])
    max_rows = max(1, SQLITE_MAX_VARS // cols)
    for i in range(0, len(mappings), max_rows):
        chunk = mappings[i : i + max_rows]
        stmt = sqlite_insert(table).values(chunk)
        if conflict:
            stmt = stmt.on_conflict_do_nothing(index_elements=conflict)
        session.execute(stmt)


def delete_model(session, model_name: str) -> int:
    ids = select(Pass.id).where(Pass.model_name == model_name)
    session.execute(
        delete(CandidateProbability).where(CandidateProbability.prediction_id.in_(ids))
    )
    result = session.execute(delete(Pass).where(Pass.model_name == model_name))
    return result.rowcount or 0


def write_records(
    db_path: str | Path, records: Sequence[PredictionRecord], overwrite: bool = True
) -> int:
    """
    Bulk-insert records. With ``overwrite`` the rows of every model present in
    ``records`` are replaced; otherwise duplicates (model, pass_id) are skipped.
    """
    engine, SessionLocal = open_store(db_path)
    session = SessionLocal()
    try:
        models = sorted({r.model for r in records})
        if overwrite:
            for name in models:
                removed = delete_model(session, name)
                if removed:
                    logger.info("Replaced %d stored %s predictions", removed, name)

        _chunked_insert(
            session,
            Pass.__table__,
            [_pass_row(r) for r in records],
            conflict=["model_name", "pass_id"],
        )

        ids = {
            (m, p): i
            for i, m, p in session.execute(
                select(Pass.id, Pass.model_name, Pass.pass_id).where(
                    Pass.model_name.in_(models)
                )
            )
        }
        existing = set(
            session.execute(
                select(CandidateProbability.prediction_id).distinct()
            ).scalars()
        )
        candidates = []
        for r in records:
            prediction_id = ids[(r.model, r.pass_id)]
            if prediction_id in existing:
                continue
            existing.add(prediction_id)
            candidates.extend(
                {
                    "prediction_id": prediction_id,
                    "candidate_index": k,
                    "player_id": player_id,
                    "probability": p,
                }
                for k, (player_id, p) in enumerate(zip(r.candidate_ids, r.probabilities))
            )
        _chunked_insert(session, CandidateProbability.__table__, candidates)
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()
        engine.dispose()
    logger.info("Stored %d prediction records in %s", len(records), db_path)
    return len(records)


def _to_record(row: Pass) -> PredictionRecord:
    return PredictionRecord(
        pass_id=row.pass_id,
        probabilities=tuple(c.probability for c in row.candidates),
        candidate_ids=tuple(c.player_id for c in row.candidates),
        true_index=row.true_index,
        chosen_index=row.chosen_index,
        pass_successful=row.pass_successful,
        passer_id=row.passer_id,
        passer_role=row.passer_role,
        frame_id=row.frame_id,
        model=row.model_name,
        split=row.split,
        distance_band=row.distance_band,
        phase=row.phase,
        direction=row.direction,
    )


def read_records(
    db_path: str | Path, model_name: str | None = None, split: str | None = None
) -> list[PredictionRecord]:
    """Records in insertion order, optionally for one model and split."""
    engine, SessionLocal = open_store(db_path, create=False)
    try:
        with SessionLocal() as session:
            q = select(Pass).options(selectinload(Pass.candidates)).order_by(Pass.id)
            if model_name is not None:
                q = q.where(Pass.model_name == model_name)
            if split is not None:
                q = q.where(Pass.split == split)
            return [_to_record(row) for row in session.execute(q).scalars()]
    finally:
        engine.dispose()


def stored_models(db_path: str | Path) -> list[str]:
    engine, SessionLocal = open_store(db_path, create=False)
    try:
        with SessionLocal() as session:
            return list(
                session.execute(
                    select(Pass.model_name).distinct().order_by(Pass.model_name)
                ).scalars()
            )
    finally:
        engine.dispose()
