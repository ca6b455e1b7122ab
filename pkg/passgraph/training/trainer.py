"""
Training loop: deterministic split, shuffled whole-graph mini-batches,
AdamW, plateau schedule, early stopping on validation loss.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
import pandas as pd

from passgraph.graph.batching import GraphBatch
from passgraph.graph.builder import PassGraph
from passgraph.model.mpnn import (
    MpnnConfig,
    MpnnModel,
    forward,
    init_model,
    training_step,
)
from passgraph.training.optim import AdamWState, PlateauState, adamw_step, plateau_scheduler
from passgraph.utils.common_utils import derived_rng
from passgraph.utils.errors import ConfigError, NumericalError, TooFewSamples
from passgraph.utils.logger_utils import log_debug, setup_logger

logger = setup_logger(__name__)

MIN_SPLIT_SIZE = 10


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 7.6e-4
    weight_decay: float = 5.7e-4
    batch_size: int = 64
    max_epochs: int = 40
    plateau_patience: int = 5
    plateau_factor: float = 0.5
    early_stop_patience: int = 15
    split_ratio: tuple[float, float, float] = (0.70, 0.15, 0.15)
    seed: int = 0
    num_workers: int = 1
    strict: bool = False

    def validate(self) -> "TrainConfig":
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate", "must be > 0")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay", "must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size", "must be >= 1")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs", "must be >= 1")
        if self.plateau_patience < 1:
            raise ConfigError("plateau_patience", "must be >= 1")
        if not 0 < self.plateau_factor < 1:
            raise ConfigError("plateau_factor", "must lie in (0, 1)")
        if self.early_stop_patience < 1:
            raise ConfigError("early_stop_patience", "must be >= 1")
        if self.num_workers < 1:
            raise ConfigError("num_workers", "must be >= 1")
        check_ratios(self.split_ratio)
        return self


def check_ratios(ratios) -> tuple[float, float, float]:
    if len(ratios) != 3:
        raise ConfigError("split_ratio", "needs exactly (train, val, test)")
    if any(r <= 0 for r in ratios):
        raise ConfigError("split_ratio", "every ratio must be positive")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError("split_ratio", f"ratios sum to {sum(ratios)}, not 1")
    return tuple(float(r) for r in ratios)


class DatasetSplit(NamedTuple):
    train: list
    val: list
    test: list


def split_dataset(items: Sequence, ratios=(0.70, 0.15, 0.15), seed: int = 0) -> DatasetSplit:
    """
    Seeded shuffle, then floor(n * ratio) items to val and test each; the
    remainder goes to train.
    """
    ratios = check_ratios(ratios)
    n = len(items)
    if n < MIN_SPLIT_SIZE:
        raise TooFewSamples(f"need at least {MIN_SPLIT_SIZE} items to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    n_val = math.floor(n * ratios[1])
    n_test = math.floor(n * ratios[2])
    n_train = n - n_val - n_test
    pick = lambda idx: [items[i] for i in idx]
    return DatasetSplit(
        train=pick(order[:n_train]),
        val=pick(order[n_train : n_train + n_val]),
        test=pick(order[n_train + n_val :]),
    )


def training_split(
    items: Sequence, split_names: Sequence[str], successful: Sequence[bool]
) -> DatasetSplit:
    """
    Group items by split name. Train and val keep successful passes only;
    test keeps every pass.
    """
    if not len(items) == len(split_names) == len(successful):
        raise ValueError("items, split names and outcomes must have the same length")
    groups = {name: [] for name in DatasetSplit._fields}
    for item, name, ok in zip(items, split_names, successful):
        if name == "test" or ok:
            groups[name].append(item)
    return DatasetSplit(**groups)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_top1: float
    val_loss: float
    val_top1: float
    learning_rate: float
    seconds: float


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = float("inf")
    test_metrics: dict = field(default_factory=dict)
    checkpoint: str | None = None
    config: dict = field(default_factory=dict)
    stopped_early: bool = False

    def epochs_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(e) for e in self.epochs])

    def summary(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "epochs_run": len(self.epochs),
            "stopped_early": self.stopped_early,
            "test_metrics": self.test_metrics,
            "checkpoint": self.checkpoint,
            "config": self.config,
        }

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        """One JSON record per epoch plus a summary block."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        epochs_path = out_dir / "train_report.jsonl"
        with epochs_path.open("w", encoding="utf-8") as f:
            for record in self.epochs:
                f.write(json.dumps(asdict(record), sort_keys=True) + "\n")
        summary_path = out_dir / "train_summary.json"
        summary_path.write_text(
            json.dumps(self.summary(), indent=4, sort_keys=True), encoding="utf-8"
        )
        return epochs_path, summary_path


class GraphMetrics(NamedTuple):
    loss: float
    top1: float
    top3: float


def batch_top_k(probs: np.ndarray, batch: GraphBatch, k: int) -> np.ndarray:
    """Per graph: is the label among the k most probable candidates."""
    hits = np.zeros(batch.num_graphs, dtype=bool)
    labels = batch.require_labels()
    for g, (a, b) in enumerate(zip(batch.graph_offsets[:-1], batch.graph_offsets[1:])):
        local = np.where(batch.candidate_mask[a:b], probs[a:b], -np.inf)
        label = labels[g] - a
        # rank = candidates strictly better, plus equal ones with a lower index
        better = np.sum(local > local[label]) + np.sum(local[:label] == local[label])
        hits[g] = better < k
    return hits


def evaluate_graphs(model: MpnnModel, graphs: Sequence[PassGraph], batch_size: int = 256) -> GraphMetrics:
    if len(graphs) == 0:
        return GraphMetrics(float("nan"), float("nan"), float("nan"))
    loss_sum, top1, top3 = 0.0, 0, 0
    for start in range(0, len(graphs), batch_size):
        batch = GraphBatch.from_graphs(graphs[start : start + batch_size])
        labels = batch.require_labels()
        probs, trace = forward(model, batch)
        loss_sum += float(-np.sum(trace.log_probs[labels]))
        top1 += int(batch_top_k(probs, batch, 1).sum())
        top3 += int(batch_top_k(probs, batch, 3).sum())
    n = len(graphs)
    return GraphMetrics(loss_sum / n, top1 / n, top3 / n)


def _sharded_step(model, graphs, rng_seed, workers, pool):
    """Gradient over one batch split into ordered shards, reduced in shard order."""
    shards = [s for s in np.array_split(np.arange(len(graphs)), workers) if len(s)]
    jobs = [
        pool.submit(
            training_step,
            model,
            [graphs[i] for i in shard],
            True,
            derived_rng(*rng_seed, j),
        )
        for j, shard in enumerate(shards)
    ]
    results = [job.result() for job in jobs]
    total = len(graphs)
    loss = sum(r.loss * r.batch.num_graphs for r in results) / total
    grads = {name: np.zeros_like(v) for name, v in model.params.items()}
    for r in results:
        weight = r.batch.num_graphs / total
        for name in grads:
            grads[name] += weight * r.grads[name]
    hits = np.concatenate([batch_top_k(r.probs, r.batch, 1) for r in results])
    return loss, grads, hits


def train(
    model_config: MpnnConfig,
    train_config: TrainConfig,
    dataset: DatasetSplit,
    initial_model: MpnnModel | None = None,
) -> tuple[TrainReport, MpnnModel]:
    """
    Fit an MPNN on ``dataset.train`` and keep the parameters of the epoch
    with the lowest validation loss. Test metrics are computed for that
    checkpoint when a test split is present.
    """
    train_config.validate()
    model = initial_model.copy() if initial_model is not None else init_model(model_config)
    train_graphs, val_graphs = list(dataset.train), list(dataset.val)
    if not train_graphs:
        raise TooFewSamples("empty training split")
    if not val_graphs:
        raise TooFewSamples("empty validation split")

    workers = 1 if train_config.strict else train_config.num_workers
    shuffle_rng = np.random.default_rng(train_config.seed)
    optimizer = AdamWState.create(model.params)
    schedule = PlateauState(lr=train_config.learning_rate)
    lr = train_config.learning_rate

    report = TrainReport(
        config={"model": model_config.as_dict(), "training": asdict(train_config)}
    )
    best_model = model.copy()
    since_best = 0
    logger.info(
        "Training MPNN: %d train / %d val graphs, %d parameters, %d worker(s)",
        len(train_graphs),
        len(val_graphs),
        model.num_parameters,
        workers,
    )

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for epoch in range(train_config.max_epochs):
            started = time.perf_counter()
            order = shuffle_rng.permutation(len(train_graphs))
            loss_sum, hits = 0.0, 0
            for b, start in enumerate(range(0, len(order), train_config.batch_size)):
                graphs = [train_graphs[i] for i in order[start : start + train_config.batch_size]]
                try:
                    if pool is None:
                        step = training_step(
                            model, graphs, True, derived_rng(train_config.seed, epoch, b)
                        )
                        loss, grads = step.loss, step.grads
                        batch_hits = batch_top_k(step.probs, step.batch, 1)
                    else:
                        loss, grads, batch_hits = _sharded_step(
                            model, graphs, (train_config.seed, epoch, b), workers, pool
                        )
                except NumericalError as e:
                    logger.error("Aborting at epoch %d batch %d: %s", epoch, b, e)
                    raise
                params, optimizer = adamw_step(
                    model.params, grads, optimizer, lr, train_config.weight_decay
                )
                model = model.with_params(params)
                loss_sum += loss * len(graphs)
                hits += int(batch_hits.sum())
                log_debug(logger, "epoch %s batch %s loss %s", epoch, b, loss)

            val = evaluate_graphs(model, val_graphs)
            record = EpochRecord(
                epoch=epoch,
                train_loss=loss_sum / len(train_graphs),
                train_top1=hits / len(train_graphs),
                val_loss=val.loss,
                val_top1=val.top1,
                learning_rate=lr,
                seconds=time.perf_counter() - started,
            )
            report.epochs.append(record)
            logger.info(
                "Epoch %d: train loss %.4f top1 %.3f | val loss %.4f top1 %.3f | lr %.2e",
                epoch,
                record.train_loss,
                record.train_top1,
                record.val_loss,
                record.val_top1,
                lr,
            )

            if val.loss < report.best_val_loss:
                report.best_val_loss = val.loss
                report.best_epoch = epoch
                best_model = model.copy()
                since_best = 0
            else:
                since_best += 1

            lr, schedule = plateau_scheduler(
                val.loss,
                schedule,
                patience=train_config.plateau_patience,
                factor=train_config.plateau_factor,
            )
            if since_best >= train_config.early_stop_patience:
                report.stopped_early = True
                logger.info("Early stop after epoch %d (best epoch %d)", epoch, report.best_epoch)
                break
    finally:
        if pool is not None:
            pool.shutdown()

    if dataset.test:
        report.test_metrics = evaluate_graphs(best_model, list(dataset.test))._asdict()
        logger.info("Test metrics at best epoch: %s", report.test_metrics)
    return report, best_model
