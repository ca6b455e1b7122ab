"""
Conditional-logit ranker over hand-crafted candidate features.

Each candidate j is described by [node_j (7) || edge_pj (3) || node_passer (7)]
and scored linearly; scores go through the same per-graph masked softmax as
the MPNN readout.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from passgraph.graph.builder import EDGE_FEATURES, NODE_FEATURES, PassGraph
from passgraph.model.model_io import load_params, save_params
from passgraph.model.mpnn import rank_order
from passgraph.utils.errors import EmptyInput, MissingLabel, ShapeMismatch
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

NUM_FEATURES = 2 * len(NODE_FEATURES) + len(EDGE_FEATURES)
DEFAULT_L2 = 1e-4


class Design(NamedTuple):
    features: np.ndarray  # (candidates, 17)
    starts: np.ndarray  # first row of every graph
    segment: np.ndarray  # graph id per row
    label_rows: np.ndarray | None


def candidate_features(graph: PassGraph) -> np.ndarray:
    candidates = graph.candidate_indices
    passer = np.broadcast_to(
        graph.node_features[graph.passer_index], (len(candidates), len(NODE_FEATURES))
    )
    return np.hstack(
        [graph.node_features[candidates], graph.candidate_edge_features(), passer]
    )


def build_design(graphs: Sequence[PassGraph], require_labels: bool = True) -> Design:
    if len(graphs) == 0:
        raise EmptyInput("no graphs to build a design matrix from")
    blocks, starts, label_rows = [], [], []
    row = 0
    for graph in graphs:
        feats = candidate_features(graph)
        starts.append(row)
        if graph.label_index is not None:
            label_rows.append(row + int(np.searchsorted(graph.candidate_indices, graph.label_index)))
        elif require_labels:
            raise MissingLabel(f"pass {graph.pass_id} has no receiver label")
        blocks.append(feats)
        row += feats.shape[0]
    starts = np.array(starts)
    lengths = np.diff(np.append(starts, row))
    return Design(
        features=np.vstack(blocks),
        starts=starts,
        segment=np.repeat(np.arange(len(graphs)), lengths),
        label_rows=np.array(label_rows) if len(label_rows) == len(graphs) else None,
    )


def _segment_softmax(scores: np.ndarray, design: Design):
    shifted = scores - np.maximum.reduceat(scores, design.starts)[design.segment]
    exp = np.exp(shifted)
    denom = np.add.reduceat(exp, design.starts)
    return exp / denom[design.segment], shifted - np.log(denom)[design.segment]


def objective(theta: np.ndarray, design: Design, l2: float = DEFAULT_L2):
    """Mean cross-entropy plus 0.5 * l2 * |w|^2, and its gradient in theta = [w, b]."""
    w, b = theta[:NUM_FEATURES], theta[NUM_FEATURES]
    probs, log_probs = _segment_softmax(design.features @ w + b, design)
    n = len(design.starts)
    loss = -np.mean(log_probs[design.label_rows]) + 0.5 * l2 * float(w @ w)
    g = probs.copy()
    g[design.label_rows] -= 1.0
    g /= n
    grad = np.empty_like(theta)
    grad[:NUM_FEATURES] = design.features.T @ g + l2 * w
    grad[NUM_FEATURES] = g.sum()
    return float(loss), grad


@dataclass(frozen=True)
class LogRegModel:
    weights: np.ndarray
    bias: float = 0.0
    l2: float = DEFAULT_L2

    name = "logreg"

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.shape != (NUM_FEATURES,):
            raise ShapeMismatch(f"logreg weights {weights.shape}, expected ({NUM_FEATURES},)")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def zeros(cls, l2: float = DEFAULT_L2) -> "LogRegModel":
        return cls(np.zeros(NUM_FEATURES), 0.0, l2)

    @property
    def theta(self) -> np.ndarray:
        return np.append(self.weights, self.bias)

    def predict_proba(self, graph: PassGraph) -> np.ndarray:
        return logreg_predict(self, graph)

    def ranking(self, graph: PassGraph) -> np.ndarray:
        return rank_order(self.predict_proba(graph), graph.candidate_indices)


def logreg_train(
    graphs: Sequence[PassGraph],
    l2: float = DEFAULT_L2,
    max_iter: int = 500,
    tol: float = 1e-7,
) -> LogRegModel:
    design = build_design(graphs)
    result = minimize(
        objective,
        np.zeros(NUM_FEATURES + 1),
        args=(design, l2),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": tol},
    )
    logger.info(
        "LogReg fitted on %d passes: loss %.4f after %d iterations (%s)",
        len(graphs),
        result.fun,
        result.nit,
        result.message,
    )
    return LogRegModel(result.x[:NUM_FEATURES].copy(), float(result.x[NUM_FEATURES]), l2)


def logreg_predict(model: LogRegModel, graph: PassGraph) -> np.ndarray:
    """Node-level probabilities with zero at the passer."""
    scores = candidate_features(graph) @ model.weights + model.bias
    scores = scores - scores.max()
    exp = np.exp(scores)
    probs = np.zeros(graph.num_nodes)
    probs[graph.candidate_indices] = exp / exp.sum()
    return probs


def save_logreg(model: LogRegModel, path: str | Path) -> Path:
    return save_params(
        path,
        "logreg",
        {"l2": model.l2, "num_features": NUM_FEATURES},
        {"weights": model.weights, "bias": np.array([model.bias])},
    )


def load_logreg(path: str | Path) -> LogRegModel:
    config, params = load_params(path, "logreg")
    if config.get("num_features") != NUM_FEATURES:
        raise ShapeMismatch(f"{path}: {config.get('num_features')} features, expected {NUM_FEATURES}")
    return LogRegModel(params["weights"], float(params["bias"][0]), float(config["l2"]))
