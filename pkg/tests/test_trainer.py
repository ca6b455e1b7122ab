import json
import math

import numpy as np
import pytest

from passgraph.model.mpnn import MpnnConfig
from passgraph.training.trainer import (
    DatasetSplit,
    TrainConfig,
    evaluate_graphs,
    split_dataset,
    train,
    training_split,
)
from passgraph.utils.errors import ConfigError, TooFewSamples

SMALL_MODEL = MpnnConfig(hidden_dim=16, num_layers=2, dropout=0.0, seed=1)


@pytest.mark.parametrize("n, sizes", [(100, (70, 15, 15)), (101, (71, 15, 15)), (10, (8, 1, 1))])
def test_split_sizes(n, sizes):
    split = split_dataset(list(range(n)), (0.70, 0.15, 0.15), seed=3)
    assert tuple(len(part) for part in split) == sizes
    union = set(split.train) | set(split.val) | set(split.test)
    assert union == set(range(n))
    assert len(union) == n


def test_split_is_seeded():
    a = split_dataset(list(range(50)), seed=9)
    b = split_dataset(list(range(50)), seed=9)
    c = split_dataset(list(range(50)), seed=10)
    assert a == b
    assert a != c


def test_split_errors():
    with pytest.raises(TooFewSamples):
        split_dataset(list(range(9)))
    with pytest.raises(ConfigError, match="split_ratio"):
        split_dataset(list(range(20)), (0.5, 0.3, 0.3))
    with pytest.raises(ConfigError, match="split_ratio"):
        split_dataset(list(range(20)), (0.8, 0.2, 0.0))


def test_training_split_keeps_failed_passes_for_test_only():
    items = list(range(8))
    names = ["train", "train", "val", "val", "test", "test", "train", "val"]
    ok = [True, False, True, False, True, False, True, None]
    split = training_split(items, names, ok)
    assert split.train == [0, 6]
    assert split.val == [2]
    assert split.test == [4, 5]
    with pytest.raises(ValueError):
        training_split(items, names[:-1], ok)


def test_training_split_on_generated_passes(small_dataset):
    states, graphs, _ = small_dataset
    idx = split_dataset(list(range(len(states))), seed=0)
    names = [None] * len(states)
    for name, indices in zip(DatasetSplit._fields, idx):
        for i in indices:
            names[i] = name
    outcomes = [s.pass_successful for s in states]
    split = training_split(list(range(len(states))), names, outcomes)
    assert split.train and split.val
    assert all(states[i].pass_successful for i in split.train + split.val)
    assert sorted(split.test) == sorted(idx.test)
    assert any(not states[i].pass_successful for i in split.test)


def test_train_config_validation():
    with pytest.raises(ConfigError, match="plateau_factor"):
        TrainConfig(plateau_factor=1.0).validate()
    with pytest.raises(ConfigError, match="batch_size"):
        TrainConfig(batch_size=0).validate()


def _dataset(graphs):
    return split_dataset(graphs[:200], seed=0)


def test_training_beats_uniform(small_dataset):
    _, graphs, _ = small_dataset
    dataset = _dataset(graphs)
    uniform = np.mean([math.log(g.candidate_mask.sum()) for g in dataset.train])
    cfg = TrainConfig(learning_rate=5e-3, batch_size=16, max_epochs=5, seed=2, strict=True)
    report, model = train(SMALL_MODEL, cfg, dataset)

    assert len(report.epochs) == 5
    assert report.epochs[-1].train_loss < uniform
    assert report.best_val_loss == min(e.val_loss for e in report.epochs)
    assert evaluate_graphs(model, dataset.val).loss == pytest.approx(report.best_val_loss)
    assert set(report.test_metrics) == {"loss", "top1", "top3"}


def test_training_is_deterministic(small_dataset):
    _, graphs, _ = small_dataset
    dataset = split_dataset(graphs[:60], seed=0)
    cfg = TrainConfig(batch_size=8, max_epochs=2, seed=4, strict=True)
    model_cfg = MpnnConfig(hidden_dim=8, num_layers=2, dropout=0.2, seed=5)
    first, m1 = train(model_cfg, cfg, dataset)
    second, m2 = train(model_cfg, cfg, dataset)
    assert [e.train_loss for e in first.epochs] == [e.train_loss for e in second.epochs]
    assert [e.val_loss for e in first.epochs] == [e.val_loss for e in second.epochs]
    for name in m1.params:
        np.testing.assert_array_equal(m1.params[name], m2.params[name])


def test_sharded_training_is_repeatable(small_dataset):
    _, graphs, _ = small_dataset
    dataset = split_dataset(graphs[:60], seed=0)
    cfg = TrainConfig(batch_size=16, max_epochs=2, seed=4, num_workers=3)
    first, _ = train(SMALL_MODEL, cfg, dataset)
    second, _ = train(SMALL_MODEL, cfg, dataset)
    assert [e.train_loss for e in first.epochs] == [e.train_loss for e in second.epochs]


def test_early_stopping(small_dataset):
    _, graphs, _ = small_dataset
    dataset = split_dataset(graphs[:60], seed=0)
    cfg = TrainConfig(
        learning_rate=1e-300, batch_size=16, max_epochs=30, early_stop_patience=2, strict=True
    )
    report, _ = train(SMALL_MODEL, cfg, dataset)
    assert report.stopped_early
    assert len(report.epochs) < 30


def test_empty_validation_split(small_dataset):
    _, graphs, _ = small_dataset
    with pytest.raises(TooFewSamples):
        train(SMALL_MODEL, TrainConfig(max_epochs=1), DatasetSplit(graphs[:20], [], []))


def test_report_write(tmp_path, small_dataset):
    _, graphs, _ = small_dataset
    dataset = split_dataset(graphs[:40], seed=0)
    report, _ = train(SMALL_MODEL, TrainConfig(batch_size=16, max_epochs=2, strict=True), dataset)
    epochs_path, summary_path = report.write(tmp_path)
    lines = epochs_path.read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["epoch"] == 0
    summary = json.loads(summary_path.read_text())
    assert summary["epochs_run"] == 2
    assert summary["config"]["model"]["hidden_dim"] == 16
    assert list(report.epochs_frame().columns)[:3] == ["epoch", "train_loss", "train_top1"]
