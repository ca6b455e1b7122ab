import os

os.environ.setdefault("PASSGRAPH_LOG_CONSOLE", "false")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from passgraph.core.state import GameState, PitchSpec, PlayerState, Role  # noqa: E402
from passgraph.graph.builder import build_scaled_graph  # noqa: E402
from passgraph.synthetic.generator import GeneratorConfig, generate_dataset  # noqa: E402


def make_state(
    attackers,
    defenders,
    passer="A1",
    receiver=None,
    ball=None,
    successful=None,
    frame_id=0,
    pass_id=None,
    left_to_right=True,
):
    """
    ``attackers`` / ``defenders``: lists of (x, y) or (x, y, role) tuples.
    Ids are A1.. and D1.. in list order; the ball defaults to 0.5 m behind
    the passer.
    """

    def players(rows, prefix):
        out = []
        for k, row in enumerate(rows):
            role = row[2] if len(row) > 2 else Role.MIDFIELDER
            out.append(PlayerState(f"{prefix}{k + 1}", (row[0], row[1]), role=role))
        return out

    att = players(attackers, "A")
    if ball is None:
        p = next(a for a in att if a.id == passer).pos
        ball = (p[0] - 0.5, p[1])
    return GameState(
        frame_id=frame_id,
        timestamp=frame_id * 0.04,
        attackers=att,
        defenders=players(defenders, "D"),
        ball=ball,
        passer_id=passer,
        receiver_id=receiver,
        pass_successful=successful,
        pass_id=pass_id,
        attacking_left_to_right=left_to_right,
    )


def random_state(rng, n_attackers=11, n_defenders=11, labelled=True, pitch=None):
    pitch = pitch or PitchSpec()
    att = [
        (rng.uniform(5, pitch.length - 5), rng.uniform(5, pitch.width - 5))
        for _ in range(n_attackers)
    ]
    dfd = [
        (rng.uniform(5, pitch.length - 5), rng.uniform(5, pitch.width - 5))
        for _ in range(n_defenders)
    ]
    receiver = f"A{int(rng.integers(2, n_attackers + 1))}" if labelled else None
    state = make_state(att, dfd, passer="A1", receiver=receiver, successful=True)
    return state


@pytest.fixture
def pitch():
    return PitchSpec()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def square_scene():
    """Four attackers, two defenders; passer A1 at the origin side, ball behind."""
    return make_state(
        attackers=[(30.0, 34.0), (40.0, 34.0), (30.0, 44.0), (20.0, 24.0)],
        defenders=[(35.0, 34.0), (31.0, 38.0)],
        passer="A1",
        receiver="A2",
        successful=True,
        pass_id="sq-1",
    )


@pytest.fixture(scope="session")
def small_dataset():
    """400 synthetic passes with their scaled graphs, shared across modules."""
    states, manifest = generate_dataset(GeneratorConfig(seed=11, n_passes=400))
    graphs = [build_scaled_graph(s) for s in states]
    return states, graphs, manifest
