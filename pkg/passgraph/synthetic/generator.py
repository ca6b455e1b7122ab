"""
Synthetic pass snapshots with a planted expert policy.

Attackers line up in a 4-3-3 and defenders in a 4-4-2 block, both shifted up
or down the pitch together and jittered. The receiver is drawn from a
softmax over a utility built only from quantities the graph features expose
(progress, lane traffic, pressure, distance), so the task stays learnable.
"""

import math
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.special import softmax

from passgraph.core.kinematics import categorize_pass
from passgraph.core.state import GameState, PitchSpec, PlayerState, Role
from passgraph.graph.geometry import GeometryConfig, lane_traffic_many, pressure_counts
from passgraph.utils.common_utils import config_hash, derived_rng
from passgraph.utils.errors import ConfigError
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

# (role, x, y) in meters, attacking towards x = 105
ATTACK_433 = (
    ("Goalkeeper", 8.0, 34.0),
    ("Defender", 25.0, 10.0),
    ("Defender", 22.0, 26.0),
    ("Defender", 22.0, 42.0),
    ("Defender", 25.0, 58.0),
    ("Midfielder", 42.0, 22.0),
    ("Midfielder", 38.0, 34.0),
    ("Midfielder", 42.0, 46.0),
    ("Winger", 60.0, 8.0),
    ("Winger", 60.0, 60.0),
    ("Forward", 66.0, 34.0),
)
DEFEND_442 = (
    ("Goalkeeper", 100.0, 34.0),
    ("Defender", 78.0, 12.0),
    ("Defender", 80.0, 27.0),
    ("Defender", 80.0, 41.0),
    ("Defender", 78.0, 56.0),
    ("Midfielder", 63.0, 10.0),
    ("Midfielder", 62.0, 27.0),
    ("Midfielder", 62.0, 41.0),
    ("Midfielder", 63.0, 58.0),
    ("Forward", 48.0, 28.0),
    ("Forward", 48.0, 40.0),
)
EDGE_MARGIN = 0.5
BALL_OFFSET = 0.5


@dataclass(frozen=True)
class UtilityWeights:
    progress: float = 1.0  # per 10 m closer to the goal centre
    lane: float = 1.2  # per occluding defender
    pressure: float = 0.8  # per defender near the receiver
    distance: float = 1.0  # per 10 m beyond the free range
    free_range_m: float = 30.0


@dataclass(frozen=True)
class SuccessModel:
    base: float = 0.95
    lane_decay: float = 0.6  # per occluding defender
    distance_decay: float = 0.4  # per 10 m beyond free_range_m
    free_range_m: float = 20.0
    floor: float = 0.05


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 7
    n_passes: int = 20000
    jitter_sigma: float = 6.0
    block_shift: tuple[float, float] = (-12.0, 18.0)
    attacker_speed: tuple[float, float] = (0.0, 7.0)
    defender_speed: tuple[float, float] = (0.0, 6.0)
    max_acceleration: float = 3.0
    marking_prob: float = 0.4
    marking_distance: tuple[float, float] = (1.0, 4.0)
    facing_sigma: float = 0.9  # radians around the attack direction
    passer_role_weights: dict = field(
        default_factory=lambda: {
            "Goalkeeper": 0.3,
            "Defender": 1.0,
            "Midfielder": 2.0,
            "Winger": 1.2,
            "Forward": 0.6,
        }
    )
    beta: float = 6.0
    epsilon: float = 0.1
    weights: UtilityWeights = field(default_factory=UtilityWeights)
    success: SuccessModel = field(default_factory=SuccessModel)
    band_targets: dict | None = None  # e.g. {"short": 0.3, "middle": 0.55, "long": 0.15}
    max_band_attempts: int = 200

    def validate(self) -> "GeneratorConfig":
        if self.n_passes < 1:
            raise ConfigError("n_passes", "must be >= 1")
        if self.jitter_sigma < 0:
            raise ConfigError("jitter_sigma", "must be >= 0")
        if self.block_shift[0] > self.block_shift[1]:
            raise ConfigError("block_shift", "lower bound above upper bound")
        for name in ("attacker_speed", "defender_speed"):
            low, high = getattr(self, name)
            if not 0 <= low <= high <= 13.0:
                raise ConfigError(name, "must satisfy 0 <= low <= high <= 13 m/s")
        if not 0 <= self.max_acceleration <= 12.0:
            raise ConfigError("max_acceleration", "must lie in [0, 12] m/s^2")
        if not 0 <= self.marking_prob <= 1:
            raise ConfigError("marking_prob", "must lie in [0, 1]")
        if not self.beta > 0:
            raise ConfigError("beta", "must be > 0")
        if not 0 <= self.epsilon < 1:
            raise ConfigError("epsilon", "must lie in [0, 1)")
        if not 0 < self.success.base <= 1 or not 0 <= self.success.floor <= 1:
            raise ConfigError("success.base", "probabilities must lie in [0, 1]")
        unknown = set(self.passer_role_weights) - {r.value for r in Role}
        if unknown:
            raise ConfigError("passer_role_weights", f"unknown roles {sorted(unknown)}")
        if self.band_targets is not None:
            if set(self.band_targets) - {"short", "middle", "long"}:
                raise ConfigError("band_targets", "keys must be short/middle/long")
            if abs(sum(self.band_targets.values()) - 1.0) > 1e-9:
                raise ConfigError("band_targets", "proportions must sum to 1")
        return self

    def as_dict(self) -> dict:
        return asdict(self)


def _jittered(anchors, shift, sigma, rng, pitch):
    pos = np.array([[x, y] for _, x, y in anchors], dtype=np.float64)
    outfield = np.array([role != "Goalkeeper" for role, _, _ in anchors])
    pos[outfield, 0] += shift
    if sigma > 0:
        pos += rng.normal(0.0, sigma, size=pos.shape)
    pos[:, 0] = np.clip(pos[:, 0], EDGE_MARGIN, pitch.length - EDGE_MARGIN)
    pos[:, 1] = np.clip(pos[:, 1], EDGE_MARGIN, pitch.width - EDGE_MARGIN)
    return pos


def _random_vectors(rng, n, low, high):
    if high <= 0:
        return np.zeros((n, 2))
    magnitude = rng.uniform(low, high, size=n)
    heading = rng.uniform(-math.pi, math.pi, size=n)
    return np.column_stack([magnitude * np.cos(heading), magnitude * np.sin(heading)])


def generate_state(
    cfg: GeneratorConfig,
    rng: np.random.Generator,
    index: int = 0,
    pitch: PitchSpec | None = None,
) -> GameState:
    """One unlabelled snapshot; the ball sits just behind the chosen passer."""
    pitch = pitch or PitchSpec()
    shift = rng.uniform(*cfg.block_shift)
    att = _jittered(ATTACK_433, shift, cfg.jitter_sigma, rng, pitch)
    dfd = _jittered(DEFEND_442, shift, cfg.jitter_sigma, rng, pitch)

    if cfg.marking_prob > 0:
        for k in range(len(dfd)):
            if DEFEND_442[k][0] == "Goalkeeper" or rng.random() >= cfg.marking_prob:
                continue
            nearest = int(np.argmin(np.hypot(*(att - dfd[k]).T)))
            angle = rng.uniform(-math.pi, math.pi)
            gap = rng.uniform(*cfg.marking_distance)
            dfd[k] = att[nearest] + gap * np.array([math.cos(angle), math.sin(angle)])
        dfd[:, 0] = np.clip(dfd[:, 0], EDGE_MARGIN, pitch.length - EDGE_MARGIN)
        dfd[:, 1] = np.clip(dfd[:, 1], EDGE_MARGIN, pitch.width - EDGE_MARGIN)

    att_vel = _random_vectors(rng, len(att), *cfg.attacker_speed)
    dfd_vel = _random_vectors(rng, len(dfd), *cfg.defender_speed)
    att_acc = _random_vectors(rng, len(att), 0.0, cfg.max_acceleration)
    dfd_acc = _random_vectors(rng, len(dfd), 0.0, cfg.max_acceleration)

    weights = np.array(
        [cfg.passer_role_weights.get(role, 1.0) for role, _, _ in ATTACK_433]
    )
    passer = int(rng.choice(len(att), p=weights / weights.sum()))
    facing = rng.normal(0.0, cfg.facing_sigma)
    ball = att[passer] - BALL_OFFSET * np.array([math.cos(facing), math.sin(facing)])

    attackers = tuple(
        PlayerState(f"A{k + 1}", tuple(att[k]), tuple(att_vel[k]), tuple(att_acc[k]), role)
        for k, (role, _, _) in enumerate(ATTACK_433)
    )
    defenders = tuple(
        PlayerState(f"D{k + 1}", tuple(dfd[k]), tuple(dfd_vel[k]), tuple(dfd_acc[k]), role)
        for k, (role, _, _) in enumerate(DEFEND_442)
    )
    return GameState(
        frame_id=index,
        timestamp=index * 2.0,
        attackers=attackers,
        defenders=defenders,
        ball=tuple(ball),
        passer_id=attackers[passer].id,
        pass_id=f"syn-{index:06d}",
    )


class CandidateTerms(NamedTuple):
    candidate_ids: tuple[str, ...]
    progress_m: np.ndarray
    lane: np.ndarray
    pressure: np.ndarray
    distance_m: np.ndarray


def candidate_terms(
    state: GameState, geometry: GeometryConfig, pitch: PitchSpec | None = None
) -> CandidateTerms:
    """Raw ingredients of the planted utility; progress is the drop in distance to goal."""
    pitch = pitch or PitchSpec()
    goal = np.array([pitch.length, pitch.width / 2.0])
    passer = np.array(state.passer.pos)
    others = [p for p in state.attackers if p.id != state.passer_id]
    targets = np.array([p.pos for p in others], dtype=np.float64)
    defenders = np.array([p.pos for p in state.defenders], dtype=np.float64)
    offsets = targets - passer
    return CandidateTerms(
        candidate_ids=tuple(p.id for p in others),
        progress_m=np.hypot(*(passer - goal)) - np.hypot(*(targets - goal).T),
        lane=lane_traffic_many(
            passer, targets, defenders, geometry.cone_width, geometry.occlusion_radius
        ).astype(np.float64),
        pressure=pressure_counts(targets, defenders, geometry.pressure_radius).astype(
            np.float64
        ),
        distance_m=np.hypot(offsets[:, 0], offsets[:, 1]),
    )


def utility_from_terms(terms: CandidateTerms, weights: UtilityWeights) -> np.ndarray:
    return (
        weights.progress * terms.progress_m / 10.0
        - weights.lane * terms.lane
        - weights.pressure * terms.pressure
        - weights.distance * np.maximum(0.0, terms.distance_m - weights.free_range_m) / 10.0
    )


def expert_utilities(
    state: GameState,
    weights: UtilityWeights | None = None,
    geometry: GeometryConfig | None = None,
    pitch: PitchSpec | None = None,
) -> tuple[tuple[str, ...], np.ndarray]:
    """Planted utility of every candidate, in attacker order without the passer."""
    terms = candidate_terms(state, geometry or GeometryConfig(), pitch)
    return terms.candidate_ids, utility_from_terms(terms, weights or UtilityWeights())


def success_probability(lane: float, distance_m: float, model: SuccessModel) -> float:
    p = model.base * math.exp(-model.lane_decay * lane)
    p *= math.exp(-model.distance_decay * max(0.0, distance_m - model.free_range_m) / 10.0)
    return min(1.0, max(model.floor, p))


def expert_choice(
    state: GameState,
    cfg: GeneratorConfig,
    rng: np.random.Generator,
    geometry: GeometryConfig | None = None,
    pitch: PitchSpec | None = None,
) -> tuple[str, bool]:
    """
    Receiver from softmax(beta * u) with probability 1 - epsilon, uniform
    otherwise; an infinite beta picks the argmax (lowest index on ties).
    """
    terms = candidate_terms(state, geometry or GeometryConfig(), pitch)
    utility = utility_from_terms(terms, cfg.weights)
    n = len(terms.candidate_ids)
    if rng.random() < cfg.epsilon:
        choice = int(rng.integers(n))
    elif math.isinf(cfg.beta):
        choice = int(np.argmax(utility))
    else:
        choice = int(rng.choice(n, p=softmax(cfg.beta * utility)))

    p_success = success_probability(
        terms.lane[choice], terms.distance_m[choice], cfg.success
    )
    return terms.candidate_ids[choice], bool(rng.random() < p_success)


def _labelled(cfg, index, geometry, pitch, rng) -> GameState:
    state = generate_state(cfg, rng, index, pitch)
    receiver, success = expert_choice(state, cfg, rng, geometry, pitch)
    labelled = state.with_receiver(receiver, success)
    band = categorize_pass(labelled, pitch).distance_band
    return replace(labelled, pass_label=band)


def generate_pass(
    cfg: GeneratorConfig,
    index: int,
    geometry: GeometryConfig | None = None,
    pitch: PitchSpec | None = None,
) -> GameState:
    """
    Labelled pass ``index`` from its own (seed, index) stream. With band
    targets set, states are redrawn until the pass falls in a band drawn from
    the target proportions.
    """
    geometry = geometry or GeometryConfig()
    pitch = pitch or PitchSpec()
    rng = derived_rng(cfg.seed, index)
    if cfg.band_targets is None:
        return _labelled(cfg, index, geometry, pitch, rng)

    bands = sorted(cfg.band_targets)
    target = bands[rng.choice(len(bands), p=[cfg.band_targets[b] for b in bands])]
    state = None
    for _ in range(cfg.max_band_attempts):
        state = _labelled(cfg, index, geometry, pitch, rng)
        if state.pass_label == target:
            return state
    logger.warning("Pass %d: no %s pass after %d draws", index, target, cfg.max_band_attempts)
    return state


def dataset_manifest(cfg: GeneratorConfig, states) -> dict:
    bands = Counter(s.pass_label for s in states)
    categories = [categorize_pass(s) for s in states]
    return {
        "config_hash": config_hash(cfg.as_dict()),
        "seed": cfg.seed,
        "n_passes": len(states),
        "beta": cfg.beta,
        "epsilon": cfg.epsilon,
        "weights": asdict(cfg.weights),
        "success_model": asdict(cfg.success),
        "success_rate": float(np.mean([bool(s.pass_successful) for s in states])),
        "counts": {
            "distance_band": dict(sorted(bands.items())),
            "phase": dict(sorted(Counter(c.phase for c in categories).items())),
            "direction": dict(sorted(Counter(c.direction for c in categories).items())),
        },
    }


def generate_dataset(
    cfg: GeneratorConfig,
    geometry: GeometryConfig | None = None,
    pitch: PitchSpec | None = None,
) -> tuple[list[GameState], dict]:
    cfg.validate()
    states = [generate_pass(cfg, i, geometry, pitch) for i in range(cfg.n_passes)]
    manifest = dataset_manifest(cfg, states)
    logger.info(
        "Generated %d synthetic passes (seed %d, success rate %.3f)",
        len(states),
        cfg.seed,
        manifest["success_rate"],
    )
    return states, manifest
