"""
Subcommands. Each one resolves its inputs from the RunConfig, creates its
own run directory (holding ``resolved_config.yaml``) and returns it.
"""

import json
from dataclasses import replace
from pathlib import Path

import pandas as pd

from passgraph.baselines.logreg import load_logreg, logreg_predict, logreg_train, save_logreg
from passgraph.baselines.nearest import nearest_player_proba
from passgraph.cli.config import RunConfig, require_path
from passgraph.data_acquisition.snapshots import ingest, write_snapshots
from passgraph.evaluation.kpi import kpi_profiles, profiles_frame, role_distributions
from passgraph.evaluation.metrics import comparison_table, metrics_summary, stratified_metrics
from passgraph.evaluation.records import build_records, mpnn_node_probs, quality_subset
from passgraph.graph.builder import build_scaled_graph
from passgraph.model.model_io import load_model, save_model
from passgraph.plotting.make_plot import plot_training_curves, spatial_heatmaps
from passgraph.reports.bench import bench_inference
from passgraph.reports.post_game import post_game_report
from passgraph.reports.scouting import scouting_report
from passgraph.sql_pipeline.sql_utils import fetch_passer_counts, fetch_prediction_frame
from passgraph.sql_pipeline.store import open_store, read_records, stored_models, write_records
from passgraph.synthetic.generator import generate_dataset
from passgraph.training.search import random_search
from passgraph.training.trainer import DatasetSplit, split_dataset, train, training_split
from passgraph.utils.common_utils import dump_json, make_run_dir, openfile
from passgraph.utils.errors import EmptyInput
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

SPLITS = ("train", "val", "test")
MODEL_FILE = "model.pgm"
LOGREG_FILE = "logreg.pgm"
SPLIT_FILE = "split.json"
SNAPSHOT_FILE = "snapshots.jsonl"
PREDICTIONS_FILE = "predictions.db"


def _write_table(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, sep="\t", index=False)
    return path


def _labelled_states(config: RunConfig):
    states = ingest(require_path(config, "data", "--data", "snapshot file"))
    labelled = [s for s in states if s.receiver_id is not None]
    if len(labelled) < len(states):
        logger.warning("Ignoring %d snapshots without a receiver", len(states) - len(labelled))
    if not labelled:
        raise EmptyInput("no labelled passes in the snapshot file")
    return labelled


def _graphs(states, config: RunConfig):
    return [build_scaled_graph(s, config.geometry, config.pitch) for s in states]


def _index_split(n: int, config: RunConfig) -> DatasetSplit:
    return split_dataset(list(range(n)), config.training.split_ratio, config.training.seed)


def _split_labels(states, config: RunConfig, model_path: Path | None = None) -> list[str]:
    """Split name per state: from the split file beside the model, else recomputed."""
    split_file = model_path.parent / SPLIT_FILE if model_path is not None else None
    if split_file is not None and split_file.exists():
        stored = openfile(split_file) or {}
        lookup = {pid: name for name in SPLITS for pid in stored.get(name, [])}
        if all(s.key in lookup for s in states):
            return [lookup[s.key] for s in states]
        logger.warning("%s does not cover these passes; recomputing the split", split_file)
    labels = [None] * len(states)
    for name, indices in zip(SPLITS, _index_split(len(states), config)):
        for i in indices:
            labels[i] = name
    return labels


def _dataset(states, graphs, labels) -> DatasetSplit:
    dataset = training_split(graphs, labels, [bool(s.pass_successful) for s in states])
    logger.info(
        "Fitting on %d train / %d val successful passes (%d test passes)",
        len(dataset.train),
        len(dataset.val),
        len(dataset.test),
    )
    return dataset


def cmd_generate(config: RunConfig) -> Path:
    states, manifest = generate_dataset(config.generator, config.geometry, config.pitch)
    run_dir = make_run_dir(config.paths.runs_dir, "generate", config.to_dict())
    write_snapshots(states, run_dir / SNAPSHOT_FILE, config.pitch)
    dump_json(manifest, run_dir / "manifest.json")
    return run_dir


def cmd_train(config: RunConfig) -> Path:
    states = _labelled_states(config)
    graphs = _graphs(states, config)
    labels = _split_labels(states, config)
    dataset = _dataset(states, graphs, labels)

    run_dir = make_run_dir(config.paths.runs_dir, "train", config.to_dict())
    report, model = train(config.model, config.training, dataset)
    model_path = save_model(model, run_dir / MODEL_FILE)
    report.checkpoint = str(model_path)
    report.write(run_dir)
    plot_training_curves(report.epochs_frame(), run_dir / "training_curves.svg")

    save_logreg(logreg_train(dataset.train), run_dir / LOGREG_FILE)
    split_keys = {
        name: [s.key for s, lab in zip(states, labels) if lab == name] for name in SPLITS
    }
    split_keys["fitted"] = [g.pass_id for g in dataset.train + dataset.val]
    dump_json(split_keys, run_dir / SPLIT_FILE)
    logger.info("Model saved to %s (best epoch %d)", model_path, report.best_epoch)
    return run_dir


def cmd_eval(config: RunConfig) -> Path:
    model_path = require_path(config, "model", "--model", "model file")
    model = load_model(model_path)
    states = _labelled_states(config)
    graphs = _graphs(states, config)
    labels = _split_labels(states, config, model_path)
    train_graphs = _dataset(states, graphs, labels).train

    logreg_path = model_path.parent / LOGREG_FILE
    if logreg_path.exists():
        logreg = load_logreg(logreg_path)
    else:
        logger.info("No %s beside the model; fitting logistic regression", LOGREG_FILE)
        logreg = logreg_train(train_graphs)

    run_dir = make_run_dir(config.paths.runs_dir, "eval", config.to_dict())
    by_model = {
        "mpnn": build_records(
            states, graphs, mpnn_node_probs(model, graphs), "mpnn", labels, config.pitch
        ),
        "logreg": build_records(
            states, graphs, lambda g: logreg_predict(logreg, g), "logreg", labels, config.pitch
        ),
        "nearest": build_records(
            states, graphs, nearest_player_proba, "nearest", labels, config.pitch
        ),
    }
    write_records(
        run_dir / PREDICTIONS_FILE, [r for records in by_model.values() for r in records]
    )

    quality = {name: quality_subset(records, "test") for name, records in by_model.items()}
    if not quality["mpnn"]:
        raise EmptyInput("no successful passes in the test split")
    table = comparison_table(quality)
    _write_table(table, run_dir / "metrics.tsv")
    _write_table(stratified_metrics(quality["mpnn"]), run_dir / "stratified_metrics.tsv")

    profiles = kpi_profiles(by_model["mpnn"], config.report.min_passes)
    _write_table(profiles_frame(profiles), run_dir / "kpi_profiles.tsv")
    _write_table(role_distributions(profiles), run_dir / "role_distributions.tsv")

    summary = {name: metrics_summary(records) for name, records in quality.items()}
    dump_json({"model": str(model_path), "test_metrics": summary}, run_dir / "eval_summary.json")
    logger.info("Test metrics: %s", json.dumps(summary, sort_keys=True))
    return run_dir


def _stored_tables(db_path: Path, model_name: str):
    """Per-pass prediction summary and per-passer counts read back from the store."""
    engine, SessionLocal = open_store(db_path, create=False)
    try:
        with SessionLocal() as session:
            predictions = fetch_prediction_frame(session, model_name, round_to=6)
            passer_counts = fetch_passer_counts(session, model_name)
    finally:
        engine.dispose()
    return predictions, passer_counts


def cmd_report(config: RunConfig) -> Path:
    db_path = require_path(config, "predictions", "--predictions", "prediction store")
    models = stored_models(db_path)
    if "mpnn" not in models:
        raise EmptyInput(f"{db_path} holds no mpnn predictions (stored: {models})")
    records = read_records(db_path, "mpnn")
    states = ingest(require_path(config, "data", "--data", "snapshot file"))

    run_dir = make_run_dir(config.paths.runs_dir, "report", config.to_dict())
    predictions, passer_counts = _stored_tables(db_path, "mpnn")
    _write_table(predictions.reset_index(), run_dir / "predictions.tsv")
    _write_table(passer_counts.reset_index(), run_dir / "passer_counts.tsv")
    opts = config.report
    post_game_report(
        records,
        states,
        run_dir / "post_game",
        opts.gap_threshold,
        config.pitch,
        strict=config.strict,
        workers=opts.workers,
        top_k=opts.top_k,
    )
    profiles = kpi_profiles(records, opts.min_passes)
    scouting_report(profiles, run_dir / "scouting", opts.min_passes, opts.z_threshold)
    try:
        spatial_heatmaps(records, states, run_dir / "top1_heatmaps.svg", config.pitch)
    except EmptyInput as e:
        logger.warning("Heatmaps skipped: %s", e)
    return run_dir


def cmd_bench(config: RunConfig) -> Path:
    model = load_model(require_path(config, "model", "--model", "model file"))
    states = ingest(require_path(config, "data", "--data", "snapshot file"))
    opts = config.bench
    report = bench_inference(
        model,
        states,
        config.geometry,
        config.pitch,
        n_samples=opts.n_samples,
        warmup=opts.warmup,
        seed=opts.seed,
        budget_s=opts.budget_s,
    )
    run_dir = make_run_dir(config.paths.runs_dir, "bench", config.to_dict())
    dump_json(report.as_dict(), run_dir / "bench_summary.json")
    _write_table(report.summary(), run_dir / "bench_summary.tsv")
    _write_table(report.per_pass(), run_dir / "bench_per_pass.tsv")
    return run_dir


def cmd_search(config: RunConfig) -> Path:
    states = _labelled_states(config)
    dataset = _dataset(states, _graphs(states, config), _split_labels(states, config))
    result = random_search(
        config.search, dataset, base_model=config.model, base_training=config.training
    )
    run_dir = make_run_dir(config.paths.runs_dir, "search", config.to_dict())
    _write_table(result.trials, run_dir / "search_trials.tsv")
    _write_table(result.correlations, run_dir / "search_correlations.tsv")
    _write_table(result.aggregators, run_dir / "search_aggregators.tsv")
    return run_dir


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "report": cmd_report,
    "bench": cmd_bench,
    "search": cmd_search,
}


def run_pipeline(config: RunConfig) -> dict[str, Path]:
    """Run the enabled steps in order, handing each output to the next step."""
    toggles = config.pipeline
    run_dirs = {}
    if toggles.run_generate:
        run_dirs["generate"] = cmd_generate(config)
        config = replace(
            config, paths=replace(config.paths, data=str(run_dirs["generate"] / SNAPSHOT_FILE))
        )
    if toggles.run_search:
        run_dirs["search"] = cmd_search(config)
    if toggles.run_train:
        run_dirs["train"] = cmd_train(config)
        config = replace(
            config, paths=replace(config.paths, model=str(run_dirs["train"] / MODEL_FILE))
        )
    if toggles.run_eval:
        run_dirs["eval"] = cmd_eval(config)
        config = replace(
            config,
            paths=replace(config.paths, predictions=str(run_dirs["eval"] / PREDICTIONS_FILE)),
        )
    if toggles.run_report:
        run_dirs["report"] = cmd_report(config)
    if toggles.run_bench:
        run_dirs["bench"] = cmd_bench(config)
    logger.info("Pipeline finished: %s", {k: str(v) for k, v in run_dirs.items()})
    return run_dirs
