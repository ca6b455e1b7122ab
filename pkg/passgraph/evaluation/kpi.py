"""
Decision-quality KPIs per passer.

  best_pass_score   chosen receiver is the model's Top-1       (all passes)
  good_pass_score   chosen receiver is within the Top-3        (all passes)
  creativity_ratio  receiver outside the Top-3                 (successful passes)
"""

from dataclasses import asdict, dataclass
from typing import Sequence

import pandas as pd

from passgraph.core.state import Role
from passgraph.evaluation.records import PredictionRecord
from passgraph.utils.errors import EmptyInput

MIN_PASSES = 50
KPI_COLUMNS = ("best_pass_score", "good_pass_score", "creativity_ratio")


@dataclass(frozen=True)
class KpiProfile:
    player_id: str
    role: Role
    pass_count: int
    best_pass_score: float
    good_pass_score: float
    creativity_ratio: float
    completion_rate: float
    successful_count: int = 0
    included: bool = True  # pass_count >= min_passes

    def as_dict(self) -> dict:
        out = asdict(self)
        out["role"] = self.role.value
        return out


def kpi_frame(records: Sequence[PredictionRecord]) -> pd.DataFrame:
    """One row per record with the rank of the chosen receiver."""
    return pd.DataFrame(
        {
            "player_id": [r.passer_id for r in records],
            "role": [r.passer_role.value for r in records],
            "rank": [r.rank_of(r.chosen_index) for r in records],
            "successful": [bool(r.pass_successful) for r in records],
        }
    )


def kpi_profiles(records: Sequence[PredictionRecord], min_passes: int = MIN_PASSES) -> list[KpiProfile]:
    """
    Profiles for every passer, sorted by player id. A player without
    successful passes gets a creativity ratio of 0.
    """
    if len(records) == 0:
        return []
    frame = kpi_frame(records)
    profiles = []
    for player_id, group in frame.groupby("player_id", sort=True):
        n = len(group)
        successful = group[group["successful"]]
        n_success = len(successful)
        creative = int((successful["rank"] > 3).sum())
        profiles.append(
            KpiProfile(
                player_id=str(player_id),
                role=Role.parse(group["role"].mode().iloc[0]),
                pass_count=n,
                best_pass_score=float((group["rank"] == 1).sum() / n),
                good_pass_score=float((group["rank"] <= 3).sum() / n),
                creativity_ratio=creative / n_success if n_success else 0.0,
                completion_rate=n_success / n,
                successful_count=n_success,
                included=n >= min_passes,
            )
        )
    return profiles


def profiles_frame(profiles: Sequence[KpiProfile]) -> pd.DataFrame:
    return pd.DataFrame([p.as_dict() for p in profiles])


def role_distributions(profiles: Sequence[KpiProfile], min_passes: int | None = None) -> pd.DataFrame:
    """
    Mean and quartiles of each KPI per role, over included profiles, plus an
    ``All`` row.
    """
    if len(profiles) == 0:
        raise EmptyInput("no KPI profiles to summarize")
    frame = profiles_frame(profiles)
    if min_passes is None:
        frame = frame[frame["included"]]
    else:
        frame = frame[frame["pass_count"] >= min_passes]
    rows = []
    groups = [(role, g) for role, g in frame.groupby("role", sort=True)]
    groups.append(("All", frame))
    for role, group in groups:
        for kpi in KPI_COLUMNS:
            values = group[kpi]
            rows.append(
                {
                    "role": role,
                    "kpi": kpi,
                    "players": len(values),
                    "mean": values.mean() if len(values) else None,
                    "q25": values.quantile(0.25) if len(values) else None,
                    "median": values.median() if len(values) else None,
                    "q75": values.quantile(0.75) if len(values) else None,
                }
            )
    return pd.DataFrame(rows, columns=["role", "kpi", "players", "mean", "q25", "median", "q75"])
