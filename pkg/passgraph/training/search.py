"""Random hyperparameter search over the MPNN grid."""

import math
import time
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy.stats import spearmanr

from passgraph.model.mpnn import AGGREGATORS, MpnnConfig
from passgraph.training.trainer import DatasetSplit, TrainConfig, train
from passgraph.utils.common_utils import derived_rng
from passgraph.utils.errors import ConfigError
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

NUMERIC_PARAMS = (
    "hidden_dim",
    "num_layers",
    "dropout",
    "learning_rate",
    "weight_decay",
    "batch_size",
)


@dataclass(frozen=True)
class SearchSpace:
    hidden_dim: tuple[int, ...] = (128, 256, 512)
    num_layers: tuple[int, ...] = (3, 5, 7)
    dropout: tuple[float, float] = (0.1, 0.5)
    learning_rate: tuple[float, float] = (1e-5, 1e-3)  # log-uniform
    weight_decay: tuple[float, float] = (1e-5, 1e-3)  # log-uniform
    batch_size: tuple[int, ...] = (64, 128, 256, 512)
    aggregator: tuple[str, ...] = ("mean", "max", "add")
    trials: int = 20
    trial_epochs: int = 5
    seed: int = 0

    def validate(self) -> "SearchSpace":
        for name in ("hidden_dim", "num_layers", "batch_size", "aggregator"):
            if not getattr(self, name):
                raise ConfigError(name, "choice list must not be empty")
        for name in ("hidden_dim", "num_layers", "batch_size"):
            if any(int(v) < 1 for v in getattr(self, name)):
                raise ConfigError(name, "choices must be >= 1")
        for name in ("dropout", "learning_rate", "weight_decay"):
            low, high = getattr(self, name)
            if not low <= high:
                raise ConfigError(name, f"range [{low}, {high}] is empty")
        if not (0 <= self.dropout[0] and self.dropout[1] < 1):
            raise ConfigError("dropout", "must lie in [0, 1)")
        if self.learning_rate[0] <= 0 or self.weight_decay[0] <= 0:
            raise ConfigError("learning_rate", "log-uniform ranges must be positive")
        unknown = set(self.aggregator) - set(AGGREGATORS)
        if unknown:
            raise ConfigError("aggregator", f"unknown aggregators {sorted(unknown)}")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if self.trial_epochs < 1:
            raise ConfigError("trial_epochs", "must be >= 1")
        return self

    def sample(self, rng: np.random.Generator) -> dict:
        def log_uniform(bounds):
            low, high = bounds
            return float(math.exp(rng.uniform(math.log(low), math.log(high))))

        return {
            "hidden_dim": int(rng.choice(self.hidden_dim)),
            "num_layers": int(rng.choice(self.num_layers)),
            "dropout": float(rng.uniform(*self.dropout)),
            "learning_rate": log_uniform(self.learning_rate),
            "weight_decay": log_uniform(self.weight_decay),
            "batch_size": int(rng.choice(self.batch_size)),
            "aggregator": str(self.aggregator[rng.integers(len(self.aggregator))]),
        }


class SearchResult(NamedTuple):
    trials: pd.DataFrame
    correlations: pd.DataFrame
    aggregators: pd.DataFrame


def sample_configs(space: SearchSpace, trials: int | None = None) -> list[dict]:
    trials = space.trials if trials is None else trials
    return [space.sample(derived_rng(space.seed, t)) for t in range(trials)]


def hyperparameter_correlations(trials: pd.DataFrame) -> pd.DataFrame:
    """
    Spearman rank correlation of each numeric hyperparameter with val Top-1.
    Constant columns get ``rho = None`` and ``defined = False``.
    """
    rows = []
    for name in NUMERIC_PARAMS:
        column, target = trials[name], trials["val_top1"]
        if column.nunique() < 2 or target.nunique() < 2:
            rows.append({"param": name, "rho": None, "p_value": None, "defined": False})
            continue
        rho, p_value = spearmanr(column, target)
        rows.append(
            {"param": name, "rho": float(rho), "p_value": float(p_value), "defined": True}
        )
    table = pd.DataFrame(rows, columns=["param", "rho", "p_value", "defined"], dtype=object)
    return table.astype({"defined": bool})


def random_search(
    space: SearchSpace,
    dataset: DatasetSplit,
    trials: int | None = None,
    base_model: MpnnConfig | None = None,
    base_training: TrainConfig | None = None,
) -> SearchResult:
    """
    Train one reduced-budget model per sampled configuration and rank the
    trials by validation Top-1 (ties keep trial order).
    """
    space.validate()
    base_model = base_model or MpnnConfig()
    base_training = base_training or TrainConfig()
    rows = []
    for t, sampled in enumerate(sample_configs(space, trials)):
        model_cfg = replace(
            base_model,
            hidden_dim=sampled["hidden_dim"],
            num_layers=sampled["num_layers"],
            dropout=sampled["dropout"],
            aggregator=sampled["aggregator"],
        )
        train_cfg = replace(
            base_training,
            learning_rate=sampled["learning_rate"],
            weight_decay=sampled["weight_decay"],
            batch_size=sampled["batch_size"],
            max_epochs=space.trial_epochs,
        )
        started = time.perf_counter()
        report, _ = train(model_cfg, train_cfg, DatasetSplit(dataset.train, dataset.val, []))
        best = report.epochs[report.best_epoch]
        rows.append(
            {
                "trial": t,
                **sampled,
                "val_loss": best.val_loss,
                "val_top1": best.val_top1,
                "epochs_run": len(report.epochs),
                "seconds": time.perf_counter() - started,
            }
        )
        logger.info("Trial %d: %s -> val top1 %.3f", t, sampled, best.val_top1)

    table = pd.DataFrame(rows)
    ranked = table.sort_values("val_top1", ascending=False, kind="stable").reset_index(
        drop=True
    )
    aggregators = (
        table.groupby("aggregator")["val_top1"]
        .agg(["mean", "count"])
        .reset_index()
        .rename(columns={"mean": "mean_val_top1", "count": "trials"})
    )
    return SearchResult(ranked, hyperparameter_correlations(table), aggregators)
