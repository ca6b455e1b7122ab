from datetime import datetime

from sqlalchemy import (
    Boolean,
    Column,
    DateTime,
    Float,
    ForeignKey,
    Index,
    Integer,
    String,
    UniqueConstraint,
)
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class Pass(Base):
    """One evaluated pass for one receiver model."""

    __tablename__ = "predictions"

    id = Column(Integer, primary_key=True, autoincrement=True)
    model_name = Column(String, nullable=False)
    pass_id = Column(String, nullable=False)
    frame_id = Column(Integer, nullable=True)

    passer_id = Column(String, nullable=False)
    passer_role = Column(String, nullable=False)
    pass_successful = Column(Boolean, nullable=False)

    # Indices into the candidate vector, not node indices.
    true_index = Column(Integer, nullable=False)
    chosen_index = Column(Integer, nullable=False)

    split = Column(String, nullable=True)
    distance_band = Column(String, nullable=True)
    phase = Column(String, nullable=True)
    direction = Column(String, nullable=True)

    candidates = relationship(
        "CandidateProbability",
        back_populates="prediction",
        cascade="all, delete-orphan",
        order_by="CandidateProbability.candidate_index",
    )

    inserted_at = Column(DateTime, default=datetime.now, nullable=False)

    __table_args__ = (
        UniqueConstraint("model_name", "pass_id", name="uq_predictions_model_pass"),
        Index("idx_predictions_passer", "passer_id"),
        Index("idx_predictions_split", "split"),
        Index("idx_predictions_model_split", "model_name", "split"),
        Index("idx_predictions_model_passer", "model_name", "passer_id"),
    )


class CandidateProbability(Base):
    __tablename__ = "candidate_probabilities"

    id = Column(Integer, primary_key=True, autoincrement=True)
    prediction_id = Column(
        Integer, ForeignKey("predictions.id"), nullable=False, index=True
    )
    candidate_index = Column(Integer, nullable=False)
    player_id = Column(String, nullable=False)
    probability = Column(Float, nullable=False)

    prediction = relationship("Pass", back_populates="candidates")

    __table_args__ = (
        UniqueConstraint(
            "prediction_id", "candidate_index", name="uq_candidates_prediction_index"
        ),
        Index("idx_candidates_player", "player_id"),
    )
