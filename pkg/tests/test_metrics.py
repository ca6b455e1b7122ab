import numpy as np
import pytest

from passgraph.evaluation.metrics import (
    brier_score,
    comparison_table,
    global_auroc,
    metrics_summary,
    pooled_instances,
    stratified_metrics,
    topk_accuracy,
)
from passgraph.evaluation.records import PredictionRecord, make_record, quality_subset
from passgraph.graph.builder import build_scaled_graph
from passgraph.utils.errors import DegenerateLabels, EmptyInput, InvalidState


def record(probs, truth, pass_id="p", **kwargs):
    ids = tuple(f"A{i + 2}" for i in range(len(probs)))
    kwargs.setdefault("pass_successful", True)
    kwargs.setdefault("passer_id", "A1")
    return PredictionRecord(
        pass_id=pass_id,
        probabilities=tuple(probs),
        candidate_ids=ids,
        true_index=truth,
        chosen_index=truth,
        **kwargs,
    )


def test_record_validation():
    with pytest.raises(InvalidState):
        record([0.5, 0.4], 0)
    with pytest.raises(InvalidState):
        record([0.5, 0.5], 2)


def test_make_record_from_state(square_scene):
    graph = build_scaled_graph(square_scene)
    probs = np.array([0.0, 0.5, 0.3, 0.2])
    rec = make_record(square_scene, graph, probs, model="x", split="test")
    assert rec.candidate_ids == ("A2", "A3", "A4")
    assert rec.true_index == rec.chosen_index == 0
    assert rec.probabilities == (0.5, 0.3, 0.2)
    assert rec.distance_band is not None
    assert quality_subset([rec]) == [rec]
    assert quality_subset([rec], split="val") == []


def test_perfect_predictions():
    records = [record(np.eye(10)[t], t, pass_id=str(t)) for t in range(10)]
    for k in (1, 3, 9):
        assert topk_accuracy(records, k) == 1.0
    assert global_auroc(records) == 1.0
    assert brier_score(records) == 0.0


def test_uniform_random_top3(rng):
    records = []
    for i in range(10_000):
        p = rng.random(10)
        records.append(record(p / p.sum(), int(rng.integers(10)), pass_id=str(i)))
    assert topk_accuracy(records, 3) == pytest.approx(0.3, abs=0.02)
    assert topk_accuracy(records, 9) == 1.0


def test_auroc_matches_pair_enumeration(rng):
    records = []
    for i in range(6):
        weights = rng.integers(1, 5, size=5).astype(float)
        records.append(record(weights / weights.sum(), int(rng.integers(5)), pass_id=str(i)))
    labels, scores = pooled_instances(records)
    assert labels.size == 30
    pos, neg = scores[labels == 1], scores[labels == 0]
    wins = sum((p > n) + 0.5 * (p == n) for p in pos for n in neg)
    assert global_auroc(records) == pytest.approx(wins / (len(pos) * len(neg)), abs=1e-12)


def test_auroc_all_ties():
    records = [record([0.1] * 10, t, pass_id=str(t)) for t in range(10)]
    assert global_auroc(records) == 0.5


def test_auroc_needs_both_classes():
    with pytest.raises(DegenerateLabels):
        global_auroc([record([1.0], 0)])


def test_brier_examples():
    uniform = [record([0.1] * 10, 3)]
    assert brier_score(uniform) == pytest.approx(0.09, abs=1e-12)
    assert brier_score([record([0.5, 0.3, 0.2], 0)]) == pytest.approx(0.38 / 3, abs=1e-12)


def test_empty_input():
    with pytest.raises(EmptyInput):
        topk_accuracy([], 1)
    with pytest.raises(EmptyInput):
        brier_score([])


def test_stratified_metrics():
    records = [
        record([0.6, 0.4], 0, pass_id="a", distance_band="short", phase="build-up"),
        record([0.6, 0.4], 1, pass_id="b", distance_band="short", phase="build-up"),
        record([0.3, 0.7], 1, pass_id="c", distance_band="long", phase="build-up"),
    ]
    table = stratified_metrics(records).set_index(["stratum", "value"])
    assert table.loc[("distance_band", "short"), "n"] == 2
    assert table.loc[("distance_band", "short"), "top1"] == 0.5
    assert table.loc[("distance_band", "long"), "top1"] == 1.0
    assert table.loc[("phase", "build-up"), "n"] == 3
    assert "direction" not in table.index.get_level_values("stratum")


def test_comparison_table_lists_reported_only_ranker():
    records = [record([0.6, 0.4], 0, pass_id="a"), record([0.3, 0.7], 0, pass_id="b")]
    table = comparison_table({"mpnn": records, "nearest": records}).set_index("model")
    assert list(table.index) == ["mpnn", "nearest", "lambdamart"]
    assert table.loc["lambdamart", "source"] == "reported only"
    assert table.loc["mpnn", "top1"] == 0.5
    assert table.loc["mpnn", "reported_top1"] == pytest.approx(0.7583)
    assert metrics_summary(records)["n"] == 2
