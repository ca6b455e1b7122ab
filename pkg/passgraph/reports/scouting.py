"""Opposition scouting: per-player KPI table with within-role outliers."""

from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from passgraph import __version__
from passgraph.evaluation.kpi import MIN_PASSES, KpiProfile, profiles_frame, role_distributions
from passgraph.plotting.make_plot import kpi_distribution_figure
from passgraph.reports import env
from passgraph.utils.errors import EmptyInput
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

Z_COLUMNS = ("creativity_ratio", "best_pass_score")


def within_role_z(frame: pd.DataFrame, column: str) -> pd.Series:
    """Population z-score inside each role; NaN where the role has no spread."""
    grouped = frame.groupby("role")[column]
    mean = grouped.transform("mean")
    std = grouped.transform(lambda s: s.std(ddof=0))
    z = (frame[column] - mean) / std.where(std > 0)
    return z.astype(np.float64)


def scouting_table(
    profiles: Sequence[KpiProfile],
    min_passes: int = MIN_PASSES,
    z_threshold: float = 2.0,
    z_columns: Sequence[str] = Z_COLUMNS,
) -> pd.DataFrame:
    """Profiles with at least ``min_passes`` passes, z columns and an ``outlier`` flag."""
    frame = profiles_frame(profiles)
    if frame.empty:
        return frame.assign(outlier=pd.Series(dtype=bool))
    frame = frame[frame["pass_count"] >= min_passes].reset_index(drop=True)
    outlier = pd.Series(False, index=frame.index)
    for column in z_columns:
        z = within_role_z(frame, column)
        frame[f"z_{column}"] = z
        outlier |= z.abs().ge(z_threshold).fillna(False)
    frame["outlier"] = outlier.astype(bool)
    return frame.sort_values(["role", "player_id"]).reset_index(drop=True)


def _records(frame: pd.DataFrame) -> list[dict]:
    return frame.astype(object).where(frame.notna(), None).to_dict("records")


def scouting_report(
    profiles: Sequence[KpiProfile],
    out_dir: str | Path,
    min_passes: int = MIN_PASSES,
    z_threshold: float = 2.0,
) -> Path:
    """``index.html`` with the player table, role summaries and KPI densities."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = scouting_table(profiles, min_passes, z_threshold)
    table.to_csv(out_dir / "scouting.tsv", sep="\t", index=False)

    distributions, figure = [], None
    if len(table):
        summary = role_distributions(profiles, min_passes)
        summary.to_csv(out_dir / "role_distributions.tsv", sep="\t", index=False)
        distributions = _records(summary)
        try:
            figure = kpi_distribution_figure(
                profiles, out_dir / "kpi_distributions.svg", min_passes
            ).name
        except EmptyInput:
            logger.warning("No profiles to plot KPI distributions")
    else:
        logger.warning("No player reaches %d passes; scouting table is empty", min_passes)

    html = env.get_template("scouting.html.j2").render(
        title="Scouting: passing decision profiles",
        version=__version__,
        rows=_records(table),
        min_passes=min_passes,
        z_threshold=z_threshold,
        z_columns=list(Z_COLUMNS),
        distributions=distributions,
        figure=figure,
    )
    index = out_dir / "index.html"
    index.write_text(html, encoding="utf-8")
    logger.info(
        "Scouting report: %d players, %d outliers -> %s",
        len(table),
        int(table["outlier"].sum()) if len(table) else 0,
        index,
    )
    return index
