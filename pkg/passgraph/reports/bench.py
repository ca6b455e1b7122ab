"""
Single-pass latency benchmark.

Each sampled pass is processed alone, as it would arrive live: feature
crafting (graph construction and scaling) then a forward pass. Totals are
compared with the 25 Hz frame budget.
"""

import os
import platform
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from passgraph.core.state import GameState, PitchSpec
from passgraph.graph.builder import FeatureScaler, build_graph
from passgraph.graph.geometry import GeometryConfig
from passgraph.model.mpnn import MpnnModel, forward
from passgraph.utils.common_utils import derived_rng
from passgraph.utils.errors import ConfigError, InsufficientSamples
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

FRAME_BUDGET_S = 0.040
CRAFTING_BUDGET_S = 0.005


@dataclass(frozen=True)
class BenchConfig:
    n_samples: int = 1000
    warmup: int = 50
    seed: int = 0
    budget_s: float = FRAME_BUDGET_S

    def validate(self) -> "BenchConfig":
        if self.n_samples < 2:
            raise ConfigError("n_samples", "must be >= 2")
        if self.warmup < 0:
            raise ConfigError("warmup", "must be >= 0")
        if self.budget_s <= 0:
            raise ConfigError("budget_s", "must be positive")
        return self


def hardware_note() -> str:
    return (
        f"{platform.system()} {platform.machine()} "
        f"({platform.processor() or 'unknown cpu'}, {os.cpu_count()} cpus), "
        f"Python {platform.python_version()}, numpy {np.__version__}"
    )


@dataclass(frozen=True)
class BenchReport:
    crafting_s: np.ndarray
    inference_s: np.ndarray
    total_s: np.ndarray
    hardware: str
    budget_s: float = FRAME_BUDGET_S

    @property
    def sample_size(self) -> int:
        return len(self.total_s)

    @staticmethod
    def _stats(values: np.ndarray) -> tuple[float, float]:
        return float(np.mean(values)), float(np.std(values, ddof=1))

    def summary(self) -> pd.DataFrame:
        """Mean and sample std (ddof=1) per stage, in seconds."""
        rows = []
        for stage, values in (
            ("feature_crafting", self.crafting_s),
            ("inference", self.inference_s),
            ("total", self.total_s),
        ):
            mean, std = self._stats(values)
            rows.append({"stage": stage, "mean_s": mean, "std_s": std})
        return pd.DataFrame(rows, columns=["stage", "mean_s", "std_s"])

    @property
    def within_budget(self) -> bool:
        return float(np.mean(self.total_s)) < self.budget_s

    def per_pass(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "feature_crafting_s": self.crafting_s,
                "inference_s": self.inference_s,
                "total_s": self.total_s,
            }
        )

    def as_dict(self) -> dict:
        stats = {
            row.stage: {"mean_s": row.mean_s, "std_s": row.std_s}
            for row in self.summary().itertuples()
        }
        return {
            "sample_size": self.sample_size,
            "budget_s": self.budget_s,
            "within_budget": self.within_budget,
            "hardware": self.hardware,
            **stats,
        }


def _time_one(model, state, geometry, pitch, scaler) -> tuple[float, float]:
    t0 = time.perf_counter()
    graph = scaler.apply(build_graph(state, geometry, pitch))
    t1 = time.perf_counter()
    forward(model, graph)
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1


def bench_inference(
    model: MpnnModel,
    states: Sequence[GameState],
    geometry: GeometryConfig | None = None,
    pitch: PitchSpec | None = None,
    n_samples: int = 1000,
    warmup: int = 50,
    seed: int = 0,
    budget_s: float = FRAME_BUDGET_S,
) -> BenchReport:
    """
    Time ``n_samples`` passes drawn without replacement, after ``warmup``
    untimed iterations. Raises InsufficientSamples when fewer states exist.
    """
    if len(states) < n_samples:
        logger.error("Benchmark needs %d passes, got %d", n_samples, len(states))
        raise InsufficientSamples(f"need {n_samples} passes, got {len(states)}")
    geometry = geometry or GeometryConfig()
    pitch = pitch or PitchSpec()
    scaler = FeatureScaler.for_pitch(pitch)
    sample = derived_rng(seed).choice(len(states), size=n_samples, replace=False)

    for i in range(warmup):
        _time_one(model, states[sample[i % n_samples]], geometry, pitch, scaler)

    crafting = np.empty(n_samples)
    inference = np.empty(n_samples)
    for j, i in enumerate(sample):
        crafting[j], inference[j] = _time_one(model, states[i], geometry, pitch, scaler)

    report = BenchReport(
        crafting_s=crafting,
        inference_s=inference,
        total_s=crafting + inference,
        hardware=hardware_note(),
        budget_s=budget_s,
    )
    total_mean, total_std = BenchReport._stats(report.total_s)
    logger.info(
        "Benchmark over %d passes: total %.4f +/- %.4f s (budget %.3f s, %s)",
        n_samples,
        total_mean,
        total_std,
        budget_s,
        "met" if report.within_budget else "exceeded",
    )
    return report
