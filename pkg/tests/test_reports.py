import re
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from conftest import make_state
from passgraph.core.state import Role
from passgraph.evaluation.kpi import KpiProfile
from passgraph.evaluation.records import PredictionRecord, make_record
from passgraph.graph.builder import build_scaled_graph
from passgraph.model.mpnn import MpnnConfig, MpnnModel
from passgraph.plotting.make_plot import (
    kde_curve,
    kpi_distribution_figure,
    plot_training_curves,
    spatial_heatmaps,
)
from passgraph.plotting.pitch import render_pass_review
from passgraph.reports.bench import BenchReport, bench_inference
from passgraph.reports.post_game import ReportConfig, flag_passes, post_game_report
from passgraph.reports.scouting import scouting_report, scouting_table
from passgraph.utils.errors import ConfigError, EmptyInput, InsufficientSamples

ATTACKERS = [(30.0, 34.0), (40.0, 34.0), (30.0, 44.0), (20.0, 24.0)]
DEFENDERS = [(35.0, 34.0), (31.0, 38.0)]


def scene(pass_id, receiver="A2", successful=False, video_ref=None):
    state = make_state(
        ATTACKERS, DEFENDERS, receiver=receiver, successful=successful, pass_id=pass_id
    )
    if video_ref is not None:
        state = replace(state, video_ref=video_ref)
    return state


def scored(state, probs):
    """Record for ``state`` with candidate probabilities for A2, A3, A4."""
    graph = build_scaled_graph(state)
    node = np.zeros(graph.num_nodes)
    node[graph.candidate_indices] = probs
    return make_record(state, graph, node)


def test_review_svg_is_deterministic(tmp_path):
    state = scene("p1")
    record = scored(state, [0.125, 0.625, 0.25])
    a = render_pass_review(state, record, tmp_path / "a.svg")
    b = render_pass_review(state, record, tmp_path / "b.svg")
    assert a.read_bytes() == b.read_bytes()


def test_review_svg_structure(tmp_path):
    state = scene("p1")
    record = scored(state, [0.125, 0.625, 0.25])
    svg = render_pass_review(state, record, tmp_path / "p1.svg").read_text()
    for gid in (
        "pitch",
        "ball",
        "actual-pass",
        "model-top1",
        "top5-table",
        "attacker-A1",
        "attacker-A4",
        "defender-D1",
        "defender-D2",
        "label-A2",
    ):
        assert f'id="{gid}"' in svg, gid
    for label in ("passer", "0.125", "0.625", "0.250"):
        assert label in svg
    assert "Top-5 receivers" in svg


def test_flag_oracle():
    records = [
        scored(scene("low"), [0.4, 0.35, 0.25]),
        scored(scene("big"), [0.05, 0.95, 0.0]),
        scored(scene("mid"), [0.2, 0.7, 0.1]),
        scored(scene("won", successful=True), [0.0, 1.0, 0.0]),
        scored(scene("edge"), [0.25, 0.5, 0.25]),
    ]
    flagged = flag_passes(records, threshold=0.25)
    assert [r.pass_id for r in flagged] == ["big", "mid", "edge"]
    assert flagged[0].gap() == pytest.approx(0.9)


def test_post_game_report(tmp_path):
    states = [scene("big", video_ref="match.mp4#t=12"), scene("mid"), scene("ok")]
    records = [
        scored(states[0], [0.05, 0.95, 0.0]),
        scored(states[1], [0.2, 0.7, 0.1]),
        scored(states[2], [0.5, 0.3, 0.2]),
    ]
    index = post_game_report(records, states, tmp_path, threshold=0.25, workers=2)
    html = index.read_text()
    assert 'id="flags"' in html
    assert html.index("pass-big") < html.index("pass-mid")
    assert "match.mp4#t=12" in html
    assert "reviews/big.svg" in html
    assert (tmp_path / "reviews" / "big.svg").exists()
    assert (tmp_path / "reviews" / "mid.svg").exists()
    flags = pd.read_csv(tmp_path / "flags.tsv", sep="\t")
    assert list(flags["pass_id"]) == ["big", "mid"]


def test_parallel_and_sequential_renders_match(tmp_path):
    states = [scene(f"p{i}") for i in range(4)]
    records = [scored(s, [0.1, 0.8, 0.1]) for s in states]
    post_game_report(records, states, tmp_path / "seq", strict=True)
    post_game_report(records, states, tmp_path / "par", workers=4)
    for s in states:
        name = f"reviews/{s.pass_id}.svg"
        assert (tmp_path / "seq" / name).read_bytes() == (tmp_path / "par" / name).read_bytes()


def test_no_flags_banner(tmp_path):
    states = [scene("fine")]
    records = [scored(states[0], [0.5, 0.3, 0.2])]
    html = post_game_report(records, states, tmp_path).read_text()
    assert 'id="no-flags"' in html
    assert "No flags" in html
    assert 'id="flags"' not in html


def test_report_config_validation():
    ReportConfig().validate()
    with pytest.raises(ConfigError, match="gap_threshold"):
        ReportConfig(gap_threshold=1.5).validate()


def profile(pid, role, creativity, best=0.5, passes=80):
    return KpiProfile(
        player_id=pid,
        role=role,
        pass_count=passes,
        best_pass_score=best,
        good_pass_score=max(best, 0.7),
        creativity_ratio=creativity,
        completion_rate=0.8,
        successful_count=int(0.8 * passes),
        included=passes >= 50,
    )


def test_scouting_single_player():
    table = scouting_table([profile("X", Role.MIDFIELDER, 0.3)])
    assert len(table) == 1
    assert np.isnan(table.loc[0, "z_creativity_ratio"])
    assert not table.loc[0, "outlier"]


def test_scouting_planted_outlier(tmp_path):
    creativities = [0.10, 0.11, 0.09, 0.10, 0.12, 0.08, 0.10, 0.11, 0.09, 0.10]
    profiles = [profile(f"D{i}", Role.DEFENDER, c) for i, c in enumerate(creativities)]
    profiles.append(profile("D99", Role.DEFENDER, 0.9))
    profiles.append(profile("F1", Role.FORWARD, 0.9))
    profiles.append(profile("F2", Role.FORWARD, 0.1, passes=10))
    table = scouting_table(profiles, min_passes=50).set_index("player_id")
    assert "F2" not in table.index
    assert table["outlier"].sum() == 1
    assert table.loc["D99", "outlier"]
    assert table.loc["D99", "z_creativity_ratio"] > 2.0

    index = scouting_report(profiles, tmp_path, min_passes=50)
    html = index.read_text()
    assert len(re.findall(r'<tr class="outlier">', html)) == 1
    assert 'id="roles"' in html
    assert (tmp_path / "kpi_distributions.svg").exists()
    assert (tmp_path / "scouting.tsv").exists()


def test_scouting_report_without_qualified_players(tmp_path):
    index = scouting_report([profile("A", Role.WINGER, 0.2, passes=3)], tmp_path)
    assert 'id="players"' in index.read_text()


def test_kde_curve_degenerate():
    grid = np.linspace(0, 1, 11)
    assert kde_curve(np.array([0.3]), grid) is None
    assert kde_curve(np.array([0.3, 0.3, 0.3]), grid) is None
    density = kde_curve(np.array([0.2, 0.4, 0.5, 0.7]), grid)
    assert density.shape == (11,) and np.all(density >= 0)


def test_heatmaps_and_curves(tmp_path):
    states = [scene(f"h{i}") for i in range(3)]
    records = [scored(s, [0.1, 0.8, 0.1]) for s in states]
    assert spatial_heatmaps(records, states, tmp_path / "heat.svg").exists()
    with pytest.raises(EmptyInput):
        spatial_heatmaps(records, [], tmp_path / "none.svg")
    epochs = pd.DataFrame(
        {
            "epoch": [0, 1],
            "train_loss": [2.2, 2.0],
            "val_loss": [2.25, 2.1],
            "train_top1": [0.2, 0.3],
            "val_top1": [0.18, 0.25],
        }
    )
    assert plot_training_curves(epochs, tmp_path / "curves.svg").exists()


def test_bench_report(small_dataset):
    states, _, _ = small_dataset
    model = MpnnModel(MpnnConfig(hidden_dim=8, num_layers=1))
    report = bench_inference(model, states[:40], n_samples=25, warmup=2, seed=1)
    assert report.sample_size == 25
    np.testing.assert_array_equal(report.total_s, report.crafting_s + report.inference_s)
    summary = report.summary().set_index("stage")
    assert summary.loc["total", "std_s"] == pytest.approx(np.std(report.total_s, ddof=1))
    assert summary.loc["inference", "mean_s"] == pytest.approx(report.inference_s.mean())
    assert report.as_dict()["sample_size"] == 25
    assert len(report.per_pass()) == 25


def test_bench_needs_enough_passes(small_dataset):
    states, _, _ = small_dataset
    model = MpnnModel(MpnnConfig(hidden_dim=8, num_layers=1))
    with pytest.raises(InsufficientSamples):
        bench_inference(model, states[:10], n_samples=20)


def test_bench_stats_ddof():
    values = np.array([0.01, 0.02, 0.03])
    report = BenchReport(values / 2, values / 2, values, "test")
    assert BenchReport._stats(values)[1] == pytest.approx(0.01)
    assert report.within_budget


def test_kpi_distribution_figure(tmp_path):
    profiles = [
        KpiProfile("M1", Role.MIDFIELDER, 60, 0.4, 0.8, 0.2, 0.85),
        KpiProfile("M2", Role.MIDFIELDER, 70, 0.5, 0.7, 0.3, 0.80),
        KpiProfile("D1", Role.DEFENDER, 55, 0.6, 0.9, 0.1, 0.90),
        KpiProfile("F1", Role.FORWARD, 5, 0.2, 0.5, 0.5, 0.60, included=False),
    ]
    out = kpi_distribution_figure(profiles, tmp_path / "kpi.svg")
    text = out.read_text()
    assert "Creativity Ratio" in text
    assert "Forward" not in text
    with pytest.raises(EmptyInput):
        kpi_distribution_figure([], tmp_path / "empty.svg")
