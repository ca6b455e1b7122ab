"""
Passer-centric star graphs.

Every attacker becomes a node, every passer/teammate pair two directed
edges (passer -> teammate first, then teammate -> passer) sharing one
feature vector. Defenders never become nodes; they only enter through the
pressure and lane-traffic counts.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from passgraph.core.kinematics import canonicalize_state, normalize_position
from passgraph.core.state import GameState, PitchSpec, Role
from passgraph.graph.geometry import (
    GeometryConfig,
    facing_direction,
    lane_traffic_many,
    pressure_counts,
    signed_angles,
)
from passgraph.utils.errors import EmptyInput

NODE_FEATURES = ("x", "y", "vx", "vy", "ax", "ay", "pressure")
EDGE_FEATURES = ("distance", "angle", "lane_traffic")
COUNT_SCALE = 5.0


@dataclass(frozen=True)
class PassGraph:
    node_features: np.ndarray  # (N, 7)
    edge_features: np.ndarray  # (M, 3)
    edge_index: np.ndarray  # (M, 2) int, columns (src, dst)
    passer_index: int
    candidate_mask: np.ndarray  # (N,) bool, False at the passer
    label_index: int | None
    player_ids: tuple[str, ...]
    roles: tuple[Role, ...] = ()
    positions: np.ndarray | None = None  # (N, 2) canonical meters, not a feature
    pass_id: str | None = None
    scaled: bool = False

    @property
    def num_nodes(self) -> int:
        return self.node_features.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edge_features.shape[0]

    @property
    def candidate_indices(self) -> np.ndarray:
        return np.flatnonzero(self.candidate_mask)

    def candidate_edge_features(self) -> np.ndarray:
        """Edge features of passer -> candidate, ordered like candidate_indices."""
        return self.edge_features[0::2]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def build_graph(
    state: GameState,
    cfg: GeometryConfig | None = None,
    pitch: PitchSpec | None = None,
) -> PassGraph:
    """
    Star graph for one pass situation, with unscaled features.

    The state is canonicalized to a left-to-right attack first. Node order
    follows ``state.attackers``; for N attackers there are N - 1 candidates
    and 2(N - 1) edges. Raises InvalidState for players off the padded pitch.
    """
    cfg = cfg or GeometryConfig()
    pitch = pitch or PitchSpec()
    state = canonicalize_state(state, pitch)
    state.check_bounds(pitch)

    attackers = state.attackers
    ids = tuple(p.id for p in attackers)
    passer_index = ids.index(state.passer_id)
    positions = np.array([p.pos for p in attackers], dtype=np.float64)
    defenders = np.array([p.pos for p in state.defenders], dtype=np.float64)

    pressure = pressure_counts(positions, defenders, cfg.pressure_radius)
    nodes = np.empty((len(attackers), len(NODE_FEATURES)), dtype=np.float64)
    for i, player in enumerate(attackers):
        nodes[i, 0:2] = normalize_position(player.pos, pitch)
        nodes[i, 2:4] = player.vel
        nodes[i, 4:6] = player.acc
    nodes[:, 6] = pressure

    passer = attackers[passer_index]
    teammates = np.array([i for i in range(len(attackers)) if i != passer_index])
    offsets = positions[teammates] - positions[passer_index]
    distance = np.hypot(offsets[:, 0], offsets[:, 1])
    facing = facing_direction(passer.pos, state.ball, passer.vel)
    angle = signed_angles(facing, offsets)
    traffic = lane_traffic_many(
        positions[passer_index],
        positions[teammates],
        defenders,
        cfg.cone_width,
        cfg.occlusion_radius,
    )
    pair_features = np.column_stack([distance, angle, traffic.astype(np.float64)])

    edge_index = np.empty((2 * len(teammates), 2), dtype=np.int64)
    edge_index[0::2, 0] = passer_index
    edge_index[0::2, 1] = teammates
    edge_index[1::2, 0] = teammates
    edge_index[1::2, 1] = passer_index
    edges = np.repeat(pair_features, 2, axis=0)

    mask = np.ones(len(attackers), dtype=bool)
    mask[passer_index] = False
    label = ids.index(state.receiver_id) if state.receiver_id is not None else None

    return PassGraph(
        node_features=_frozen(nodes),
        edge_features=_frozen(edges),
        edge_index=_frozen(edge_index),
        passer_index=passer_index,
        candidate_mask=_frozen(mask),
        label_index=label,
        player_ids=ids,
        roles=tuple(p.role for p in attackers),
        positions=_frozen(positions),
        pass_id=state.key,
    )


@dataclass(frozen=True)
class FeatureScaler:
    """
    Fixed, pitch-derived scaling: distance by the pitch diagonal, angle by
    pi, counts by 5. Positions are already in [-1, 1]; velocities and
    accelerations pass through unchanged.
    """

    node_scale: np.ndarray = field(default_factory=lambda: np.ones(7))
    edge_scale: np.ndarray = field(default_factory=lambda: np.ones(3))

    @classmethod
    def for_pitch(cls, pitch: PitchSpec) -> "FeatureScaler":
        node_scale = np.ones(len(NODE_FEATURES))
        node_scale[6] = 1.0 / COUNT_SCALE
        edge_scale = np.array([1.0 / pitch.diagonal, 1.0 / np.pi, 1.0 / COUNT_SCALE])
        return cls(node_scale=node_scale, edge_scale=edge_scale)

    def apply(self, graph: PassGraph) -> PassGraph:
        if graph.scaled:
            return graph
        return replace(
            graph,
            node_features=_frozen(graph.node_features * self.node_scale),
            edge_features=_frozen(graph.edge_features * self.edge_scale),
            scaled=True,
        )

    def invert(self, graph: PassGraph) -> PassGraph:
        if not graph.scaled:
            return graph
        return replace(
            graph,
            node_features=_frozen(graph.node_features / self.node_scale),
            edge_features=_frozen(graph.edge_features / self.edge_scale),
            scaled=False,
        )

    def as_dict(self) -> dict:
        return {
            "node_scale": self.node_scale.tolist(),
            "edge_scale": self.edge_scale.tolist(),
        }


def fit_scaler(graphs, pitch: PitchSpec | None = None) -> FeatureScaler:
    """Scaler for a training set; fixed constants, so only the pitch matters."""
    if len(graphs) == 0:
        raise EmptyInput("cannot fit a feature scaler on an empty graph set")
    return FeatureScaler.for_pitch(pitch or PitchSpec())


def apply_scaler(scaler: FeatureScaler, graph: PassGraph) -> PassGraph:
    return scaler.apply(graph)


def build_scaled_graph(state, cfg=None, pitch=None) -> PassGraph:
    pitch = pitch or PitchSpec()
    return FeatureScaler.for_pitch(pitch).apply(build_graph(state, cfg, pitch))
