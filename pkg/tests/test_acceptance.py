"""Full-size runs: the synthetic benchmark, latency budget and end-to-end smoke."""

from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
import yaml

from conftest import random_state
from passgraph.baselines.logreg import logreg_predict, logreg_train
from passgraph.baselines.nearest import nearest_player_proba
from passgraph.cli.main import main
from passgraph.evaluation.kpi import kpi_profiles
from passgraph.evaluation.metrics import topk_accuracy
from passgraph.evaluation.records import build_records, mpnn_node_probs
from passgraph.graph.builder import build_scaled_graph
from passgraph.model.mpnn import MpnnConfig, MpnnModel, cross_entropy, forward, loss_and_gradients
from passgraph.reports.bench import CRAFTING_BUDGET_S, FRAME_BUDGET_S, bench_inference
from passgraph.sql_pipeline.store import read_records
from passgraph.synthetic.generator import GeneratorConfig, generate_dataset
from passgraph.training.trainer import (
    DatasetSplit,
    TrainConfig,
    split_dataset,
    train,
    training_split,
)

pytestmark = pytest.mark.slow


def test_gradients_on_twenty_graphs(rng):
    graphs = [
        build_scaled_graph(random_state(rng, n_attackers=int(rng.choice([3, 7, 11]))))
        for _ in range(20)
    ]
    model = MpnnModel(MpnnConfig(hidden_dim=8, num_layers=2, dropout=0.0, seed=17))
    _, grads = loss_and_gradients(model, graphs)
    eps, worst = 1e-5, 0.0
    for name, value in model.params.items():
        for idx in np.ndindex(value.shape):
            plus = {k: v.copy() for k, v in model.params.items()}
            minus = {k: v.copy() for k, v in model.params.items()}
            plus[name][idx] += eps
            minus[name][idx] -= eps
            numeric = (
                cross_entropy(model.with_params(plus), graphs)
                - cross_entropy(model.with_params(minus), graphs)
            ) / (2 * eps)
            scale = max(abs(numeric), abs(grads[name][idx]), 1e-3)
            worst = max(worst, abs(numeric - grads[name][idx]) / scale)
    assert worst < 1e-5


@pytest.mark.parametrize("aggregator, tol", [("max", 0.0), ("mean", 1e-9), ("add", 1e-9)])
def test_permutation_equivariance_pairs(rng, aggregator, tol):
    model = MpnnModel(MpnnConfig(hidden_dim=16, num_layers=3, aggregator=aggregator))
    for _ in range(100):
        state = random_state(rng, n_attackers=int(rng.choice([10, 11])))
        order = rng.permutation(len(state.attackers))
        shuffled = replace(state, attackers=tuple(state.attackers[i] for i in order))
        a, b = build_scaled_graph(state), build_scaled_graph(shuffled)
        pa, _ = forward(model, a)
        pb, _ = forward(model, b)
        by_id = dict(zip(b.player_ids, pb))
        assert np.max(np.abs(pa - [by_id[p] for p in a.player_ids])) <= tol
        assert pa[a.passer_index] == 0.0
        assert abs(pa.sum() - 1.0) <= 1e-9


@pytest.fixture(scope="module")
def benchmark():
    states, _ = generate_dataset(GeneratorConfig(seed=7, n_passes=20_000, beta=6.0, epsilon=0.1))
    graphs = [build_scaled_graph(s) for s in states]
    idx = split_dataset(list(range(len(states))), (0.70, 0.15, 0.15), seed=0)
    labels = [None] * len(states)
    for name, indices in zip(DatasetSplit._fields, idx):
        for i in indices:
            labels[i] = name
    dataset = training_split(graphs, labels, [s.pass_successful for s in states])
    report, model = train(
        MpnnConfig(hidden_dim=64, num_layers=3, aggregator="max"),
        TrainConfig(max_epochs=40, strict=True),
        dataset,
    )
    test_states = [s for s, name in zip(states, labels) if name == "test"]
    test_graphs = dataset.test
    logreg = logreg_train(dataset.train)
    records = {
        "mpnn": build_records(test_states, test_graphs, mpnn_node_probs(model, test_graphs), "mpnn"),
        "logreg": build_records(test_states, test_graphs, lambda g: logreg_predict(logreg, g), "logreg"),
        "nearest": build_records(test_states, test_graphs, nearest_player_proba, "nearest"),
    }
    return states, model, records


def test_synthetic_benchmark_ordering(benchmark):
    _, _, records = benchmark
    successful = {k: [r for r in v if r.pass_successful] for k, v in records.items()}
    top1 = {k: topk_accuracy(v, 1) for k, v in successful.items()}
    assert top1["mpnn"] >= 0.70
    assert topk_accuracy(successful["mpnn"], 3) >= 0.93
    assert top1["nearest"] <= 0.45
    assert top1["nearest"] < top1["logreg"] < top1["mpnn"]


def test_kpi_identities_on_benchmark(benchmark):
    _, _, records = benchmark
    mpnn = records["mpnn"]
    for profile in kpi_profiles(mpnn, min_passes=1):
        assert profile.good_pass_score >= profile.best_pass_score
        own = [r for r in mpnn if r.passer_id == profile.player_id and r.pass_successful]
        if own:
            in_top3 = sum(r.rank_of(r.chosen_index) <= 3 for r in own) / len(own)
            assert abs(profile.creativity_ratio + in_top3 - 1.0) <= 1e-12


def test_latency_budget(benchmark):
    states, model, _ = benchmark
    report = bench_inference(model, states, n_samples=1000, warmup=50)
    summary = report.summary().set_index("stage")
    assert summary.loc["total", "mean_s"] < FRAME_BUDGET_S
    assert summary.loc["feature_crafting", "mean_s"] < CRAFTING_BUDGET_S


def _metrics(run_dir):
    return pd.read_csv(run_dir / "metrics.tsv", sep="\t")


def test_end_to_end_pipeline(tmp_path):
    config = {
        "generator": {"n_passes": 2000},
        "model": {"hidden_dim": 32, "num_layers": 2},
        "training": {"max_epochs": 5},
        "report": {"min_passes": 20},
        "bench": {"n_samples": 200},
        "pipeline": {"run_bench": True},
    }
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(config))
    evals = []
    for attempt in ("a", "b"):
        runs = tmp_path / attempt
        assert main(["pipeline", "--config", str(path), "--out", str(runs), "--strict", "--seed", "5"]) == 0
        (eval_dir,) = runs.glob("eval-*")
        (report_dir,) = runs.glob("report-*")
        evals.append(_metrics(eval_dir))

        records = read_records(eval_dir / "predictions.db", "mpnn")
        expected = {
            r.pass_id
            for r in records
            if not r.pass_successful and max(r.probabilities) - r.probabilities[r.chosen_index] >= 0.25
        }
        flags = pd.read_csv(report_dir / "post_game" / "flags.tsv", sep="\t", dtype={"pass_id": str})
        assert set(flags["pass_id"]) == expected
        for svg in (report_dir / "post_game" / "reviews").glob("*.svg"):
            text = svg.read_text()
            assert text.startswith("<?xml") and text.rstrip().endswith("</svg>")
            assert 'id="actual-pass"' in text and 'id="model-top1"' in text
    pd.testing.assert_frame_equal(evals[0], evals[1])
