from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from sklearn import metrics

from passgraph.evaluation.records import PredictionRecord
from passgraph.utils.errors import DegenerateLabels, EmptyInput
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

STRATA = ("distance_band", "phase", "direction")
METRIC_COLUMNS = ["n", "top1", "top3", "auroc", "brier"]

# Receiver models as published on the original (non-public) match data.
REPORTED = {
    "nearest": {"top1": 0.2758, "top3": 0.6385, "auroc": 0.763, "brier": 0.086},
    "logreg": {"top1": 0.4363, "top3": 0.7967, "auroc": 0.853, "brier": 0.084},
    "lambdamart": {"top1": 0.4462, "top3": 0.8061, "auroc": 0.863, "brier": 0.069},
    "mpnn": {"top1": 0.7583, "top3": 0.9780, "auroc": 0.963, "brier": 0.036},
}


def _require(records: Sequence[PredictionRecord]):
    if len(records) == 0:
        raise EmptyInput("no prediction records")


def topk_accuracy(records: Sequence[PredictionRecord], k: int) -> float:
    _require(records)
    hits = [r.rank_of(r.true_index) <= k for r in records]
    return float(np.mean(hits))


def pooled_instances(records: Sequence[PredictionRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Every (candidate, pass) pair as a binary instance: (labels, probabilities)."""
    labels, scores = [], []
    for r in records:
        onehot = np.zeros(r.num_candidates)
        onehot[r.true_index] = 1.0
        labels.append(onehot)
        scores.append(np.asarray(r.probabilities))
    return np.concatenate(labels), np.concatenate(scores)


def global_auroc(records: Sequence[PredictionRecord]) -> float:
    _require(records)
    labels, scores = pooled_instances(records)
    if labels.min() == labels.max():
        raise DegenerateLabels("AUROC needs both positive and negative instances")
    return float(metrics.roc_auc_score(labels, scores))


def brier_score(records: Sequence[PredictionRecord]) -> float:
    _require(records)
    labels, scores = pooled_instances(records)
    if labels.min() == labels.max():
        return float(np.mean((scores - labels) ** 2))
    return float(metrics.brier_score_loss(labels, scores, pos_label=1))


def metrics_summary(records: Sequence[PredictionRecord]) -> dict:
    try:
        auroc = global_auroc(records)
    except DegenerateLabels:
        auroc = None
    return {
        "n": len(records),
        "top1": topk_accuracy(records, 1),
        "top3": topk_accuracy(records, 3),
        "auroc": auroc,
        "brier": brier_score(records),
    }


def stratified_metrics(
    records: Sequence[PredictionRecord], strata: Sequence[str] = STRATA
) -> pd.DataFrame:
    """One row per (stratum, value) with the four metrics and a row count."""
    rows = []
    for stratum in strata:
        groups: dict[str, list] = {}
        for r in records:
            value = getattr(r, stratum)
            if value is not None:
                groups.setdefault(value, []).append(r)
        for value in sorted(groups):
            rows.append({"stratum": stratum, "value": value, **metrics_summary(groups[value])})
    return pd.DataFrame(rows, columns=["stratum", "value", *METRIC_COLUMNS])


def comparison_table(
    measured: Mapping[str, Sequence[PredictionRecord]], include_reported: bool = True
) -> pd.DataFrame:
    """
    Model comparison on the same records. Models without an implementation
    here are listed with their published numbers, marked as reported only.
    """
    rows = []
    for name, records in measured.items():
        row = {"model": name, "source": "measured", **metrics_summary(records)}
        reported = REPORTED.get(name, {})
        row.update({f"reported_{k}": v for k, v in reported.items()})
        rows.append(row)
    if include_reported and "lambdamart" not in measured:
        rows.append(
            {
                "model": "lambdamart",
                "source": "reported only",
                **{f"reported_{k}": v for k, v in REPORTED["lambdamart"].items()},
            }
        )
    columns = ["model", "source", *METRIC_COLUMNS] + [
        f"reported_{k}" for k in ("top1", "top3", "auroc", "brier")
    ]
    return pd.DataFrame(rows, columns=columns)
