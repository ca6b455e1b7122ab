"""
Post-game review: unsuccessful passes where the model saw a clearly better
option, each with its pass review figure.
"""

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import pandas as pd

from passgraph import __version__
from passgraph.core.state import GameState, PitchSpec
from passgraph.evaluation.records import PredictionRecord
from passgraph.plotting.pitch import render_pass_review
from passgraph.reports import env
from passgraph.utils.errors import ConfigError
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

DEFAULT_GAP = 0.25


@dataclass(frozen=True)
class ReportConfig:
    gap_threshold: float = DEFAULT_GAP
    top_k: int = 5
    min_passes: int = 50
    z_threshold: float = 2.0
    workers: int = 4

    def validate(self) -> "ReportConfig":
        if not 0.0 <= self.gap_threshold <= 1.0:
            raise ConfigError("gap_threshold", "must lie in [0, 1]")
        if self.top_k < 1:
            raise ConfigError("top_k", "must be >= 1")
        if self.min_passes < 1:
            raise ConfigError("min_passes", "must be >= 1")
        if self.z_threshold <= 0:
            raise ConfigError("z_threshold", "must be positive")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        return self


@dataclass(frozen=True)
class FlaggedPass:
    pass_id: str
    frame_id: int | None
    passer_id: str
    chosen_id: str
    chosen_probability: float
    top1_id: str
    top1_probability: float
    gap: float
    anchor: str
    figure: str | None = None
    video_ref: str | None = None


def file_safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


def flag_passes(
    records: Sequence[PredictionRecord], threshold: float = DEFAULT_GAP
) -> list[PredictionRecord]:
    """Unsuccessful passes with gap >= threshold, largest gap first then pass_id."""
    flagged = [r for r in records if not r.pass_successful and r.gap() >= threshold]
    return sorted(flagged, key=lambda r: (-r.gap(), r.pass_id))


def _flag_entry(record: PredictionRecord, figure: str | None, video_ref) -> FlaggedPass:
    top1 = record.top1_index
    return FlaggedPass(
        pass_id=record.pass_id,
        frame_id=record.frame_id,
        passer_id=record.passer_id,
        chosen_id=record.candidate_ids[record.chosen_index],
        chosen_probability=record.probabilities[record.chosen_index],
        top1_id=record.candidate_ids[top1],
        top1_probability=record.probabilities[top1],
        gap=record.gap(),
        anchor=f"pass-{file_safe(record.pass_id)}",
        figure=figure,
        video_ref=video_ref,
    )


def post_game_report(
    records: Sequence[PredictionRecord],
    states: Sequence[GameState],
    out_dir: str | Path,
    threshold: float = DEFAULT_GAP,
    pitch: PitchSpec | None = None,
    strict: bool = False,
    workers: int = 4,
    top_k: int = 5,
) -> Path:
    """
    Write ``index.html``, ``flags.tsv`` and one SVG per flagged pass under
    ``out_dir``. Figures are rendered in parallel unless ``strict``.
    """
    out_dir = Path(out_dir)
    review_dir = out_dir / "reviews"
    review_dir.mkdir(parents=True, exist_ok=True)
    by_key = {s.key: s for s in states}
    flagged = flag_passes(records, threshold)

    jobs = []
    for record in flagged:
        state = by_key.get(record.pass_id)
        if state is None:
            logger.warning("No snapshot for flagged pass %s; figure skipped", record.pass_id)
            continue
        jobs.append((state, record, review_dir / f"{file_safe(record.pass_id)}.svg"))

    render = lambda job: render_pass_review(job[0], job[1], job[2], pitch, top_k)
    if strict or workers <= 1 or len(jobs) <= 1:
        paths = [render(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            paths = list(pool.map(render, jobs))
    figures = {job[1].pass_id: p.relative_to(out_dir).as_posix() for job, p in zip(jobs, paths)}

    entries = [
        _flag_entry(
            r,
            figures.get(r.pass_id),
            by_key[r.pass_id].video_ref if r.pass_id in by_key else None,
        )
        for r in flagged
    ]
    pd.DataFrame([asdict(e) for e in entries], columns=list(FlaggedPass.__annotations__)).to_csv(
        out_dir / "flags.tsv", sep="\t", index=False
    )
    html = env.get_template("post_game.html.j2").render(
        title="Post-game pass review",
        version=__version__,
        threshold=threshold,
        flags=entries,
        total=len(records),
        total_unsuccessful=sum(1 for r in records if not r.pass_successful),
    )
    index = out_dir / "index.html"
    index.write_text(html, encoding="utf-8")
    logger.info(
        "Post-game report: %d flagged of %d passes -> %s", len(entries), len(records), index
    )
    return index
