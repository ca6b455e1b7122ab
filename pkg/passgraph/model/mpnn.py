"""
Edge-conditioned message passing over star graphs.

Forward pass:
  h0 = phi_node(x), e = phi_edge(g)
  m_ij = M_l([h_i || h_j || e_ij]), a_j = AGG_{i->j} m_ij, h_j = U_l([h_j || a_j])
  s_j = R(h_L,j), softmax over the candidates of each graph

Everything runs on numpy arrays; gradients come from ``backward`` which
walks the recorded ForwardTrace in reverse.
"""

from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple

import numpy as np

from passgraph.graph.batching import GraphBatch
from passgraph.graph.builder import EDGE_FEATURES, NODE_FEATURES, PassGraph
from passgraph.model.layers import (
    ACTIVATIONS,
    MlpSpec,
    MlpTrace,
    dropout_masks,
    mlp_backward,
    mlp_forward,
    no_dropout,
    replay_masks,
)
from passgraph.utils.errors import (
    ConfigError,
    NonFiniteActivation,
    NonFiniteGradient,
    ShapeMismatch,
)

AGGREGATORS = ("max", "mean", "add")


@dataclass(frozen=True)
class MpnnConfig:
    hidden_dim: int = 64
    num_layers: int = 3
    aggregator: str = "max"
    dropout: float = 0.15
    activation: str = "tanh"
    mlp_depth: int = 2
    seed: int = 0
    node_dim: int = len(NODE_FEATURES)
    edge_dim: int = len(EDGE_FEATURES)

    def validate(self) -> "MpnnConfig":
        if self.hidden_dim < 1:
            raise ConfigError("hidden_dim", "must be >= 1")
        if self.num_layers < 1:
            raise ConfigError("num_layers", "must be >= 1")
        if self.aggregator not in AGGREGATORS:
            raise ConfigError("aggregator", f"must be one of {AGGREGATORS}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout", "must lie in [0, 1)")
        if self.activation not in ACTIVATIONS:
            raise ConfigError("activation", f"must be one of {tuple(ACTIVATIONS)}")
        if self.mlp_depth < 1:
            raise ConfigError("mlp_depth", "must be >= 1")
        return self

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MpnnConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass(frozen=True)
class MpnnSpecs:
    node: MlpSpec
    edge: MlpSpec
    messages: tuple[MlpSpec, ...]
    updates: tuple[MlpSpec, ...]
    readout: MlpSpec

    def ordered(self) -> list[MlpSpec]:
        layers = [s for pair in zip(self.messages, self.updates) for s in pair]
        return [self.node, self.edge, *layers, self.readout]


def build_specs(cfg: MpnnConfig) -> MpnnSpecs:
    h, depth = cfg.hidden_dim, cfg.mlp_depth
    hidden = (h,) * depth
    return MpnnSpecs(
        node=MlpSpec("node_embed", (cfg.node_dim, *hidden)),
        edge=MlpSpec("edge_embed", (cfg.edge_dim, *hidden)),
        messages=tuple(
            MlpSpec(f"message{l}", (3 * h, *hidden)) for l in range(cfg.num_layers)
        ),
        updates=tuple(
            MlpSpec(f"update{l}", (2 * h, *hidden)) for l in range(cfg.num_layers)
        ),
        readout=MlpSpec("readout", ((h,) * depth) + (1,), final_activation=False),
    )


class MpnnModel:
    def __init__(self, config: MpnnConfig, params: dict | None = None):
        self.config = config.validate()
        self.specs = build_specs(config)
        if params is None:
            rng = np.random.default_rng(config.seed)
            params = {}
            for spec in self.specs.ordered():
                params.update(spec.init(rng))
        self.params = {name: np.asarray(params[name], np.float64) for name in params}
        self._check_shapes()

    def _check_shapes(self):
        expected = self.param_shapes()
        if set(expected) != set(self.params):
            missing = sorted(set(expected) - set(self.params))
            extra = sorted(set(self.params) - set(expected))
            raise ShapeMismatch(f"parameter names differ: missing={missing} extra={extra}")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ShapeMismatch(
                    f"{name}: shape {self.params[name].shape}, expected {shape}"
                )

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes = {}
        for spec in self.specs.ordered():
            shapes.update(spec.param_shapes())
        return shapes

    def param_names(self) -> list[str]:
        return list(self.param_shapes())

    @property
    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def with_params(self, params: dict) -> "MpnnModel":
        return MpnnModel(self.config, params)

    def copy(self) -> "MpnnModel":
        return self.with_params({k: v.copy() for k, v in self.params.items()})


def init_model(config: MpnnConfig) -> MpnnModel:
    return MpnnModel(config)


# ----- aggregation


def aggregate(messages: np.ndarray, batch: GraphBatch, how: str):
    """
    Per-destination aggregation. For ``max`` also returns, for every
    (destination, dimension), the edge that supplied the maximum; ties go to
    the lowest edge index.
    """
    if how == "add":
        return batch.scatter_dst(messages), None
    if how == "mean":
        degree = np.maximum(batch.in_degree, 1.0)[:, None]
        return batch.scatter_dst(messages) / degree, None

    nodes, starts, seg_id = batch.dst_segments
    ordered = messages[batch.dst_order]
    seg_max = np.maximum.reduceat(ordered, starts, axis=0)
    position = np.arange(ordered.shape[0])[:, None]
    hit = np.where(ordered == seg_max[seg_id], position, ordered.shape[0])
    first = np.minimum.reduceat(hit, starts, axis=0)
    winner = batch.dst_order[first]

    out = np.zeros((batch.num_nodes, messages.shape[1]))
    out[nodes] = seg_max
    return out, winner


def aggregate_backward(grad: np.ndarray, batch: GraphBatch, how: str, winner):
    if how == "add":
        return grad[batch.dst]
    if how == "mean":
        degree = np.maximum(batch.in_degree, 1.0)
        return grad[batch.dst] / degree[batch.dst][:, None]

    nodes, _, _ = batch.dst_segments
    out = np.zeros((batch.num_edges, grad.shape[1]))
    columns = np.broadcast_to(np.arange(grad.shape[1]), winner.shape)
    out[winner, columns] = grad[nodes]
    return out


def masked_softmax(scores: np.ndarray, batch: GraphBatch):
    """Softmax within each graph over candidate nodes; the passer gets exactly 0."""
    starts = batch.graph_offsets[:-1]
    masked = np.where(batch.candidate_mask, scores, -np.inf)
    graph_max = np.maximum.reduceat(masked, starts)
    shifted = masked - graph_max[batch.node_graph]
    exp = np.exp(shifted)
    denom = np.add.reduceat(exp, starts)
    probs = exp / denom[batch.node_graph]
    log_probs = shifted - np.log(denom)[batch.node_graph]
    return probs, log_probs


# ----- forward / backward


@dataclass
class LayerTrace:
    message: MlpTrace
    winner: np.ndarray | None
    update: MlpTrace


@dataclass
class ForwardTrace:
    batch: GraphBatch
    node: MlpTrace
    edge: MlpTrace
    edge_embedding: np.ndarray
    layers: list[LayerTrace]
    readout: MlpTrace
    scores: np.ndarray
    probs: np.ndarray
    log_probs: np.ndarray
    masks: list = field(default_factory=list)


def _check_finite(values: np.ndarray, layer, where: str):
    if not np.all(np.isfinite(values)):
        raise NonFiniteActivation(layer, where)


def _as_batch(data) -> GraphBatch:
    if isinstance(data, GraphBatch):
        return data
    if isinstance(data, PassGraph):
        return GraphBatch.from_graphs([data])
    return GraphBatch.from_graphs(data)


def _run(model: MpnnModel, batch: GraphBatch, masks) -> ForwardTrace:
    cfg, p, specs = model.config, model.params, model.specs
    act = cfg.activation
    if batch.node_features.shape[1] != cfg.node_dim:
        raise ShapeMismatch(
            f"node features have width {batch.node_features.shape[1]},"
            f" model expects {cfg.node_dim}"
        )
    if batch.edge_features.shape[1] != cfg.edge_dim:
        raise ShapeMismatch(
            f"edge features have width {batch.edge_features.shape[1]},"
            f" model expects {cfg.edge_dim}"
        )
    recorded = []

    def recording(shape):
        mask = masks(shape)
        recorded.append(mask)
        return mask

    h, node_trace = mlp_forward(specs.node, p, batch.node_features, act, recording)
    _check_finite(h, 0, "node embedding")
    e, edge_trace = mlp_forward(specs.edge, p, batch.edge_features, act, recording)
    _check_finite(e, 0, "edge embedding")

    layers = []
    for l, (m_spec, u_spec) in enumerate(zip(specs.messages, specs.updates), 1):
        z = np.concatenate([h[batch.src], h[batch.dst], e], axis=1)
        messages, m_trace = mlp_forward(m_spec, p, z, act, recording)
        _check_finite(messages, l, "messages")
        agg, winner = aggregate(messages, batch, cfg.aggregator)
        h, u_trace = mlp_forward(
            u_spec, p, np.concatenate([h, agg], axis=1), act, recording
        )
        _check_finite(h, l, "node update")
        layers.append(LayerTrace(message=m_trace, winner=winner, update=u_trace))

    out, readout_trace = mlp_forward(specs.readout, p, h, act, recording)
    scores = out[:, 0]
    _check_finite(scores, "readout", "scores")
    probs, log_probs = masked_softmax(scores, batch)
    return ForwardTrace(
        batch=batch,
        node=node_trace,
        edge=edge_trace,
        edge_embedding=e,
        layers=layers,
        readout=readout_trace,
        scores=scores,
        probs=probs,
        log_probs=log_probs,
        masks=recorded,
    )


def forward(
    model: MpnnModel,
    data,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardTrace]:
    """
    Node-level probabilities (zero at every passer) and the trace needed
    for the backward pass. ``data`` is a PassGraph, a list of them or a
    GraphBatch. Dropout is only active with ``training=True``.
    """
    batch = _as_batch(data)
    if training and model.config.dropout > 0.0:
        masks = dropout_masks(
            rng if rng is not None else np.random.default_rng(model.config.seed),
            model.config.dropout,
        )
    else:
        masks = no_dropout
    trace = _run(model, batch, masks)
    return trace.probs, trace


def replay(model: MpnnModel, trace: ForwardTrace) -> np.ndarray:
    """Re-run a recorded forward pass with the same dropout masks."""
    return _run(model, trace.batch, replay_masks(trace.masks)).probs


def backward(model: MpnnModel, trace: ForwardTrace, grad_scores: np.ndarray) -> dict:
    cfg, p, specs = model.config, model.params, model.specs
    act, h_dim, batch = cfg.activation, cfg.hidden_dim, trace.batch
    grads = {name: np.zeros_like(value) for name, value in p.items()}

    g_h = mlp_backward(specs.readout, p, trace.readout, grad_scores[:, None], act, grads)
    g_e = np.zeros_like(trace.edge_embedding)
    for l in reversed(range(cfg.num_layers)):
        layer = trace.layers[l]
        g_in = mlp_backward(specs.updates[l], p, layer.update, g_h, act, grads)
        g_prev = g_in[:, :h_dim].copy()
        g_msg = aggregate_backward(g_in[:, h_dim:], batch, cfg.aggregator, layer.winner)
        g_z = mlp_backward(specs.messages[l], p, layer.message, g_msg, act, grads)
        g_prev += batch.scatter_src(g_z[:, :h_dim])
        g_prev += batch.scatter_dst(g_z[:, h_dim : 2 * h_dim])
        g_e += g_z[:, 2 * h_dim :]
        g_h = g_prev
    mlp_backward(specs.node, p, trace.node, g_h, act, grads)
    mlp_backward(specs.edge, p, trace.edge, g_e, act, grads)

    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradient(f"non-finite gradient for {name}")
    return grads


class StepResult(NamedTuple):
    loss: float
    grads: dict
    probs: np.ndarray
    batch: GraphBatch


def training_step(
    model: MpnnModel,
    data,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> StepResult:
    """Mean cross-entropy over the batch, its gradients and the probabilities."""
    batch = _as_batch(data)
    labels = batch.require_labels()
    probs, trace = forward(model, batch, training=training, rng=rng)
    loss = float(-np.mean(trace.log_probs[labels]))
    grad_scores = probs.copy()
    grad_scores[labels] -= 1.0
    grad_scores /= batch.num_graphs
    grads = backward(model, trace, grad_scores)
    return StepResult(loss=loss, grads=grads, probs=probs, batch=batch)


def loss_and_gradients(model: MpnnModel, data, training=False, rng=None):
    step = training_step(model, data, training=training, rng=rng)
    return step.loss, step.grads


# ----- inference


def rank_order(probs: np.ndarray, indices: np.ndarray | None = None) -> np.ndarray:
    """Indices sorted by probability descending, ties to the lower index."""
    probs = np.asarray(probs, dtype=np.float64)
    idx = np.arange(len(probs)) if indices is None else np.asarray(indices)
    return idx[np.lexsort((idx, -probs[idx]))]


class RankedCandidate(NamedTuple):
    node_index: int
    player_id: str
    probability: float


def predict_proba(model: MpnnModel, graph: PassGraph) -> np.ndarray:
    probs, _ = forward(model, graph)
    return probs


def predict_topk(model: MpnnModel, graph: PassGraph, k: int = 3) -> list[RankedCandidate]:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    probs = predict_proba(model, graph)
    order = rank_order(probs, graph.candidate_indices)[:k]
    return [
        RankedCandidate(int(i), graph.player_ids[i], float(probs[i])) for i in order
    ]


def cross_entropy(model: MpnnModel, graphs) -> float:
    batch = _as_batch(graphs)
    labels = batch.require_labels()
    _, trace = forward(model, batch)
    return float(-np.mean(trace.log_probs[labels]))
