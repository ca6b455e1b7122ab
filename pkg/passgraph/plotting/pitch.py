"""
Pass review figures: the pitch to scale, both teams, the actual pass and the
model's preferred option, saved as deterministic SVG.

Structural groups carry ``gid`` attributes so the markup can be checked:
``pitch``, ``attacker-<id>``, ``defender-<id>``, ``ball``, ``label-<id>``,
``actual-pass``, ``model-top1`` and ``top5-table``.
"""

import threading
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.figure import Figure
from matplotlib.patches import Circle, FancyArrowPatch, RegularPolygon

from passgraph.core.kinematics import canonicalize_state
from passgraph.core.state import GameState, PitchSpec
from passgraph.evaluation.records import PredictionRecord
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

SVG_RC = {"svg.hashsalt": "passgraph", "svg.fonttype": "none"}
ATTACK_COLOR = "#1f4e9c"
PASSER_COLOR = "#f2b705"
DEFEND_COLOR = "#c0392b"
ACTUAL_COLOR = "#222222"
TOP1_COLOR = "#2e8b57"
TOP_K = 5

# rcParams are process-global; saving is serialized so parallel renders
# always see SVG_RC.
_SAVE_LOCK = threading.Lock()


def save_svg(fig: Figure, out_path: str | Path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with _SAVE_LOCK, matplotlib.rc_context(SVG_RC):
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    return out_path


def pitch_segments(pitch: PitchSpec) -> list[np.ndarray]:
    """Markings as polylines, in meters: outline, halfway line, boxes, centre circle."""
    L, W = pitch.length, pitch.width
    box_depth, box_width = 16.5, 40.32
    six_depth, six_width = 5.5, 18.32
    segs = [
        np.array([(0, 0), (L, 0), (L, W), (0, W), (0, 0)]),
        np.array([(L / 2, 0), (L / 2, W)]),
    ]
    for depth, width in ((box_depth, box_width), (six_depth, six_width)):
        y0, y1 = (W - width) / 2, (W + width) / 2
        segs.append(np.array([(0, y0), (depth, y0), (depth, y1), (0, y1)]))
        segs.append(np.array([(L, y0), (L - depth, y0), (L - depth, y1), (L, y1)]))
    t = np.linspace(0.0, 2 * np.pi, 73)
    segs.append(np.column_stack([L / 2 + 9.15 * np.cos(t), W / 2 + 9.15 * np.sin(t)]))
    return segs


def draw_pitch(ax, pitch: PitchSpec):
    lines = LineCollection(pitch_segments(pitch), colors="#9a9a9a", linewidths=1.0)
    lines.set_gid("pitch")
    ax.add_collection(lines)
    ax.set_xlim(-3, pitch.length + 3)
    ax.set_ylim(-3, pitch.width + 3)
    ax.set_aspect("equal")
    ax.set_axis_off()


def _arrow(ax, start, end, color, gid, style="-|>", linestyle="-"):
    arrow = FancyArrowPatch(
        start,
        end,
        arrowstyle=style,
        mutation_scale=14,
        color=color,
        linewidth=1.8,
        linestyle=linestyle,
        shrinkA=6,
        shrinkB=6,
    )
    arrow.set_gid(gid)
    ax.add_patch(arrow)


def top_k_rows(record: PredictionRecord, k: int = TOP_K) -> list[tuple[str, float]]:
    return [
        (record.candidate_ids[i], record.probabilities[i]) for i in record.ranking()[:k]
    ]


def render_pass_review(
    state: GameState,
    record: PredictionRecord,
    out_path: str | Path,
    pitch: PitchSpec | None = None,
    top_k: int = TOP_K,
) -> Path:
    """
    Draw one pass with the probabilities of ``record``. Nothing is recomputed:
    every label is the stored probability rounded to three decimals.
    """
    pitch = pitch or PitchSpec()
    state = canonicalize_state(state, pitch)
    probs = dict(zip(record.candidate_ids, record.probabilities))
    positions = {p.id: p.pos for p in state.attackers}

    fig = Figure(figsize=(10, 5.6))
    ax = fig.add_axes([0.02, 0.05, 0.72, 0.9])
    draw_pitch(ax, pitch)

    for player in state.defenders:
        glyph = RegularPolygon(
            player.pos, numVertices=4, radius=1.1, color=DEFEND_COLOR, alpha=0.85
        )
        glyph.set_gid(f"defender-{player.id}")
        ax.add_patch(glyph)

    for player in state.attackers:
        is_passer = player.id == state.passer_id
        glyph = Circle(
            player.pos,
            radius=1.4 if is_passer else 1.0,
            facecolor=PASSER_COLOR if is_passer else ATTACK_COLOR,
            edgecolor="black" if is_passer else "white",
            linewidth=1.2,
        )
        glyph.set_gid(f"attacker-{player.id}")
        ax.add_patch(glyph)
        label = "passer" if is_passer else f"{probs[player.id]:.3f}"
        ax.text(
            player.pos[0],
            player.pos[1] + 1.8,
            label,
            ha="center",
            va="bottom",
            fontsize=7,
            gid=f"label-{player.id}",
        )

    ball = Circle(state.ball, radius=0.5, facecolor="white", edgecolor="black")
    ball.set_gid("ball")
    ax.add_patch(ball)

    passer_pos = positions[state.passer_id]
    actual = record.candidate_ids[record.chosen_index]
    top1 = record.candidate_ids[record.top1_index]
    _arrow(ax, passer_pos, positions[actual], ACTUAL_COLOR, "actual-pass")
    _arrow(ax, passer_pos, positions[top1], TOP1_COLOR, "model-top1", linestyle="--")

    outcome = "completed" if record.pass_successful else "failed"
    ax.set_title(f"Pass {record.pass_id} ({outcome})", fontsize=10)

    lines = [f"Top-{top_k} receivers"] + [
        f"{rank}. {player_id}  {p:.3f}"
        for rank, (player_id, p) in enumerate(top_k_rows(record, top_k), start=1)
    ]
    fig.text(
        0.76,
        0.85,
        "\n".join(lines),
        va="top",
        family="monospace",
        fontsize=9,
        gid="top5-table",
    )
    path = save_svg(fig, out_path)
    logger.debug("Rendered review of %s to %s", record.pass_id, path)
    return path
