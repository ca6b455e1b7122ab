from dataclasses import replace

import numpy as np
import pytest

from conftest import make_state, random_state
from passgraph.baselines.logreg import (
    NUM_FEATURES,
    LogRegModel,
    build_design,
    load_logreg,
    logreg_predict,
    logreg_train,
    objective,
    save_logreg,
)
from passgraph.baselines.nearest import NearestPlayerModel, nearest_player_predict
from passgraph.core.kinematics import canonicalize_state
from passgraph.graph.builder import build_graph, build_scaled_graph
from passgraph.utils.errors import EmptyInput, MissingLabel


def test_single_candidate_gets_everything():
    graph = build_graph(make_state([(30.0, 30.0), (40.0, 30.0)], [(60.0, 30.0)]))
    ranked = nearest_player_predict(graph)
    assert ranked == [(1, "A2", 1.0)]


def test_closer_candidate_first():
    graph = build_graph(make_state([(30.0, 30.0), (50.0, 30.0), (35.0, 30.0)], [(60.0, 30.0)]))
    ranked = nearest_player_predict(graph)
    assert [pid for _, pid, _ in ranked] == ["A3", "A2"]
    assert ranked[0][2] > ranked[1][2]
    assert sum(p for _, _, p in ranked) == pytest.approx(1.0)


def test_ranking_matches_distance_sort(rng):
    for _ in range(20):
        state = random_state(rng)
        graph = build_graph(state)
        passer = np.array(state.passer.pos)
        oracle = sorted(
            (p for p in state.attackers if p.id != state.passer_id),
            key=lambda p: np.hypot(*(np.array(p.pos) - passer)),
        )
        ranked = nearest_player_predict(graph)
        assert [pid for _, pid, _ in ranked] == [p.id for p in oracle]
        model = NearestPlayerModel()
        assert [graph.player_ids[i] for i in model.ranking(graph)] == [p.id for p in oracle]


def test_ranking_survives_rigid_motion(rng, pitch):
    state = random_state(rng)
    rotated = replace(state, attacking_left_to_right=False)
    a = nearest_player_predict(build_graph(state))
    b = nearest_player_predict(build_graph(canonicalize_state(rotated, pitch)))
    assert [pid for _, pid, _ in a] == [pid for _, pid, _ in b]


def test_zero_weights_uniform(rng):
    graph = build_scaled_graph(random_state(rng, n_attackers=9))
    probs = logreg_predict(LogRegModel.zeros(), graph)
    assert probs[graph.passer_index] == 0.0
    np.testing.assert_allclose(probs[graph.candidate_mask], 1 / 8)


def test_objective_gradient_matches_finite_differences(rng):
    graphs = [build_scaled_graph(random_state(rng)) for _ in range(6)]
    design = build_design(graphs)
    theta = rng.normal(scale=0.5, size=NUM_FEATURES + 1)
    _, grad = objective(theta, design, l2=1e-3)
    assert grad.shape == (18,)
    eps = 1e-6
    for k in range(theta.size):
        step = np.zeros_like(theta)
        step[k] = eps
        numeric = (objective(theta + step, design, 1e-3)[0] - objective(theta - step, design, 1e-3)[0]) / (2 * eps)
        scale = max(abs(numeric), abs(grad[k]), 1e-4)
        assert abs(numeric - grad[k]) / scale < 1e-6, k


def _separable(rng, n):
    """Random scenes whose receiver is the only unpressured candidate."""
    graphs = []
    for _ in range(n):
        graph = build_scaled_graph(random_state(rng))
        nodes = graph.node_features.copy()
        nodes[:, 6] = 0.4
        nodes[graph.label_index, 6] = 0.0
        graphs.append(replace(graph, node_features=nodes))
    return graphs


def test_separable_set_is_learned(rng):
    graphs = _separable(rng, 60)
    model = logreg_train(graphs, l2=1e-6, max_iter=1000)
    hits = [int(np.argmax(logreg_predict(model, g))) == g.label_index for g in graphs]
    assert all(hits)
    assert model.weights[6] < 0


def test_design_requires_labels(rng):
    with pytest.raises(EmptyInput):
        build_design([])
    graph = build_scaled_graph(random_state(rng, labelled=False))
    with pytest.raises(MissingLabel):
        build_design([graph])


def test_save_load(tmp_path, rng):
    model = LogRegModel(rng.normal(size=NUM_FEATURES), 0.3, 1e-4)
    loaded = load_logreg(save_logreg(model, tmp_path / "logreg.pgm"))
    assert loaded.weights.tobytes() == model.weights.tobytes()
    assert loaded.bias == model.bias
