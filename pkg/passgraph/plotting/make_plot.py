from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from matplotlib.figure import Figure
from statsmodels.nonparametric.kde import KDEUnivariate

from passgraph.core.kinematics import canonicalize_state
from passgraph.core.state import GameState, PitchSpec
from passgraph.evaluation.kpi import KPI_COLUMNS, KpiProfile, profiles_frame
from passgraph.evaluation.records import PredictionRecord
from passgraph.plotting.pitch import draw_pitch, save_svg
from passgraph.utils.errors import EmptyInput
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

KPI_TITLES = {
    "best_pass_score": "Best Pass Score",
    "good_pass_score": "Good Pass Score",
    "creativity_ratio": "Creativity Ratio",
}


def kde_curve(values: np.ndarray, grid: np.ndarray) -> np.ndarray | None:
    """Gaussian KDE on ``grid``; None when the sample has no spread."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) < 2 or np.ptp(values) == 0:
        return None
    kde = KDEUnivariate(values)
    kde.fit(kernel="gau", bw="scott", fft=True)
    return kde.evaluate(grid)


def kpi_distribution_figure(
    profiles: Sequence[KpiProfile],
    out_path: str | Path,
    min_passes: int | None = None,
) -> Path:
    """
    One panel per KPI with a density curve per role, over players above the
    pass threshold. Roles with a single player or a constant value get a rug
    mark instead of a curve.
    """
    frame = profiles_frame(profiles)
    if frame.empty:
        raise EmptyInput("no KPI profiles to plot")
    if min_passes is None:
        frame = frame[frame["included"]]
    else:
        frame = frame[frame["pass_count"] >= min_passes]

    grid = np.linspace(0.0, 1.0, 201)
    fig = Figure(figsize=(12, 4))
    axes = fig.subplots(1, len(KPI_COLUMNS), sharey=False)
    for ax, kpi in zip(axes, KPI_COLUMNS):
        for role, group in frame.groupby("role", sort=True):
            density = kde_curve(group[kpi].to_numpy(), grid)
            if density is None:
                ax.plot(group[kpi], np.zeros(len(group)), "|", markersize=12, label=role)
            else:
                ax.plot(grid, density, linewidth=1.5, label=role)
        ax.set_title(KPI_TITLES[kpi])
        ax.set_xlim(0, 1)
        ax.set_xlabel("value")
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("density")
    if len(frame):
        axes[-1].legend(title="Role", fontsize=8)
    fig.tight_layout()
    logger.info("KPI distributions over %d players", len(frame))
    return save_svg(fig, out_path)


def top1_locations(
    records: Sequence[PredictionRecord],
    states: Sequence[GameState],
    pitch: PitchSpec | None = None,
) -> pd.DataFrame:
    """Canonical position and role of each record's predicted receiver."""
    pitch = pitch or PitchSpec()
    by_key = {s.key: s for s in states}
    rows = []
    for record in records:
        state = by_key.get(record.pass_id)
        if state is None:
            continue
        player = canonicalize_state(state, pitch).attacker(
            record.candidate_ids[record.top1_index]
        )
        rows.append({"role": player.role.value, "x": player.pos[0], "y": player.pos[1]})
    return pd.DataFrame(rows, columns=["role", "x", "y"])


def spatial_heatmaps(
    records: Sequence[PredictionRecord],
    states: Sequence[GameState],
    out_path: str | Path,
    pitch: PitchSpec | None = None,
    bins: tuple[int, int] = (21, 14),
) -> Path:
    """Density of predicted Top-1 receiver locations, one panel per receiver role."""
    pitch = pitch or PitchSpec()
    frame = top1_locations(records, states, pitch)
    if frame.empty:
        raise EmptyInput("no records matched to states for the heatmap")
    roles = sorted(frame["role"].unique())
    fig = Figure(figsize=(4.2 * len(roles), 3.4))
    axes = np.atleast_1d(fig.subplots(1, len(roles)))
    extent = [0.0, pitch.length, 0.0, pitch.width]
    for ax, role in zip(axes, roles):
        group = frame[frame["role"] == role]
        hist, _, _ = np.histogram2d(
            group["x"],
            group["y"],
            bins=bins,
            range=[[0.0, pitch.length], [0.0, pitch.width]],
        )
        ax.imshow(
            hist.T / max(len(group), 1),
            origin="lower",
            extent=extent,
            cmap="magma",
            interpolation="nearest",
        )
        draw_pitch(ax, pitch)
        ax.set_title(f"{role} (n={len(group)})", fontsize=9)
    fig.tight_layout()
    return save_svg(fig, out_path)


def plot_training_curves(epochs: pd.DataFrame, out_path: str | Path) -> Path:
    """Loss curves and validation Top-1 per epoch from ``TrainReport.epochs_frame()``."""
    fig = Figure(figsize=(10, 4))
    ax_loss, ax_acc = fig.subplots(1, 2)
    ax_loss.plot(epochs["epoch"], epochs["train_loss"], label="train")
    ax_loss.plot(epochs["epoch"], epochs["val_loss"], label="val")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("cross-entropy")
    ax_loss.legend()
    ax_loss.grid(True, alpha=0.3)
    ax_acc.plot(epochs["epoch"], epochs["val_top1"], color="#2e8b57", label="val Top-1")
    ax_acc.plot(epochs["epoch"], epochs["train_top1"], color="#1f4e9c", label="train Top-1")
    ax_acc.set_ylim(0, 1)
    ax_acc.set_xlabel("epoch")
    ax_acc.legend()
    ax_acc.grid(True, alpha=0.3)
    fig.tight_layout()
    return save_svg(fig, out_path)
