"""Per-pass prediction records shared by metrics, KPIs, storage and reports."""

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from passgraph.core.kinematics import canonicalize_state, categorize_pass
from passgraph.core.state import GameState, PitchSpec, Role
from passgraph.graph.batching import GraphBatch
from passgraph.graph.builder import PassGraph
from passgraph.model.mpnn import MpnnModel, forward, rank_order
from passgraph.utils.errors import InvalidState

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class PredictionRecord:
    """
    Probabilities are over candidates only (the passer excluded), in node
    order. ``true_index`` and ``chosen_index`` index into that vector.
    """

    pass_id: str
    probabilities: tuple[float, ...]
    candidate_ids: tuple[str, ...]
    true_index: int
    chosen_index: int
    pass_successful: bool
    passer_id: str
    passer_role: Role = Role.UNKNOWN
    frame_id: int | None = None
    model: str = "mpnn"
    split: str | None = None
    distance_band: str | None = None
    phase: str | None = None
    direction: str | None = None

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probabilities)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "candidate_ids", tuple(self.candidate_ids))
        object.__setattr__(self, "passer_role", Role.parse(self.passer_role))
        if len(probs) == 0 or len(probs) != len(self.candidate_ids):
            raise InvalidState(f"record {self.pass_id}: probability/candidate mismatch")
        if abs(math.fsum(probs) - 1.0) > PROB_SUM_TOL:
            raise InvalidState(f"record {self.pass_id}: probabilities sum to {math.fsum(probs)}")
        for name in ("true_index", "chosen_index"):
            if not 0 <= getattr(self, name) < len(probs):
                raise InvalidState(f"record {self.pass_id}: {name} out of range")

    @property
    def num_candidates(self) -> int:
        return len(self.probabilities)

    def ranking(self) -> np.ndarray:
        return rank_order(np.array(self.probabilities))

    def rank_of(self, index: int) -> int:
        """1-based position of a candidate in the deterministic ranking."""
        return int(np.flatnonzero(self.ranking() == index)[0]) + 1

    @property
    def top1_index(self) -> int:
        return int(self.ranking()[0])

    def gap(self) -> float:
        """p(model Top-1) - p(chosen receiver)."""
        return self.probabilities[self.top1_index] - self.probabilities[self.chosen_index]


def make_record(
    state: GameState,
    graph: PassGraph,
    node_probs: np.ndarray,
    model: str = "mpnn",
    split: str | None = None,
    pitch: PitchSpec | None = None,
) -> PredictionRecord:
    if state.receiver_id is None:
        raise InvalidState(f"pass {state.key} has no receiver; cannot build a record")
    candidates = graph.candidate_indices
    chosen = int(np.searchsorted(candidates, graph.label_index))
    category = categorize_pass(canonicalize_state(state, pitch or PitchSpec()), pitch)
    return PredictionRecord(
        pass_id=state.key,
        probabilities=tuple(np.asarray(node_probs)[candidates]),
        candidate_ids=tuple(graph.player_ids[i] for i in candidates),
        true_index=chosen,
        chosen_index=chosen,
        pass_successful=bool(state.pass_successful) if state.pass_successful is not None else True,
        passer_id=state.passer_id,
        passer_role=state.passer.role,
        frame_id=state.frame_id,
        model=model,
        split=split,
        **category.as_dict(),
    )


def mpnn_node_probs(model: MpnnModel, graphs: Sequence[PassGraph], batch_size: int = 256):
    """Eval-mode node probabilities for every graph, batched."""
    out = []
    for start in range(0, len(graphs), batch_size):
        batch = GraphBatch.from_graphs(graphs[start : start + batch_size])
        probs, _ = forward(model, batch)
        out.extend(p.copy() for p in batch.per_graph(probs))
    return out


def build_records(
    states: Sequence[GameState],
    graphs: Sequence[PassGraph],
    node_probs: Sequence[np.ndarray] | Callable[[PassGraph], np.ndarray],
    model: str,
    splits: Sequence[str | None] | None = None,
    pitch: PitchSpec | None = None,
) -> list[PredictionRecord]:
    if callable(node_probs):
        node_probs = [node_probs(g) for g in graphs]
    splits = splits if splits is not None else [None] * len(graphs)
    return [
        make_record(state, graph, probs, model, split, pitch)
        for state, graph, probs, split in zip(states, graphs, node_probs, splits)
    ]


def quality_subset(records: Sequence[PredictionRecord], split: str | None = "test"):
    """Successful passes (optionally of one split): the model-quality population."""
    return [
        r for r in records if r.pass_successful and (split is None or r.split == split)
    ]
