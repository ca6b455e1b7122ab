from typing import List, Optional

import pandas as pd
from sqlalchemy import func
from sqlalchemy.orm import Session
from sqlalchemy.sql import ClauseElement

from passgraph.sql_pipeline.models import CandidateProbability, Pass
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

PREDICTION_COLUMNS = [
    "pass_id",
    "frame_id",
    "passer_id",
    "passer_role",
    "pass_successful",
    "split",
    "distance_band",
    "phase",
    "direction",
    "num_candidates",
    "chosen_probability",
    "top1_probability",
]


def fetch_prediction_frame(
    session: Session,
    model_name: str,
    *,
    split: Optional[str] = None,
    extra_filters: Optional[List[ClauseElement]] = None,
    round_to: Optional[int] = None,
) -> pd.DataFrame:
    """
    One row per stored pass of ``model_name``, indexed by pass_id.

    Columns carry the pass metadata plus the number of candidates, the
    probability of the chosen receiver and the highest candidate probability.
    """
    chosen = (
        session.query(
            CandidateProbability.prediction_id.label("pid"),
            CandidateProbability.probability.label("p"),
        )
        .join(Pass, CandidateProbability.prediction_id == Pass.id)
        .filter(CandidateProbability.candidate_index == Pass.chosen_index)
        .subquery()
    )
    stats = (
        session.query(
            CandidateProbability.prediction_id.label("pid"),
            func.count(CandidateProbability.id).label("n"),
            func.max(CandidateProbability.probability).label("pmax"),
        )
        .group_by(CandidateProbability.prediction_id)
        .subquery()
    )
    q = (
        session.query(
            Pass.pass_id,
            Pass.frame_id,
            Pass.passer_id,
            Pass.passer_role,
            Pass.pass_successful,
            Pass.split,
            Pass.distance_band,
            Pass.phase,
            Pass.direction,
            stats.c.n,
            chosen.c.p,
            stats.c.pmax,
        )
        .join(stats, stats.c.pid == Pass.id)
        .join(chosen, chosen.c.pid == Pass.id)
    )
    filt = [Pass.model_name == model_name]
    if split is not None:
        filt.append(Pass.split == split)
    if extra_filters:
        filt.extend(extra_filters)
    rows = q.filter(*filt).order_by(Pass.id).all()

    if not rows:
        logger.warning("No stored predictions for model %s", model_name)
        return pd.DataFrame(columns=PREDICTION_COLUMNS).set_index("pass_id")

    df = pd.DataFrame(rows, columns=PREDICTION_COLUMNS).set_index("pass_id")
    if round_to is not None:
        df = df.round(round_to)
    return df


def fetch_passer_counts(session: Session, model_name: str) -> pd.DataFrame:
    """Pass and completion counts per passer."""
    rows = (
        session.query(
            Pass.passer_id,
            func.count(Pass.id),
            func.sum(Pass.pass_successful),
        )
        .filter(Pass.model_name == model_name)
        .group_by(Pass.passer_id)
        .order_by(Pass.passer_id)
        .all()
    )
    df = pd.DataFrame(rows, columns=["passer_id", "passes", "completed"])
    return df.set_index("passer_id")
