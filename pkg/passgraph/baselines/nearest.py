import numpy as np
from scipy.special import softmax

from passgraph.graph.builder import PassGraph
from passgraph.model.mpnn import rank_order

TEMPERATURE_M = 10.0


def candidate_distances(graph: PassGraph) -> np.ndarray:
    """Passer-to-node distances in meters (0 at the passer)."""
    offsets = graph.positions - graph.positions[graph.passer_index]
    return np.hypot(offsets[:, 0], offsets[:, 1])


def nearest_player_proba(graph: PassGraph, temperature: float = TEMPERATURE_M) -> np.ndarray:
    """Node-level pseudo-probabilities, softmax of -d / temperature over candidates."""
    probs = np.zeros(graph.num_nodes)
    candidates = graph.candidate_indices
    probs[candidates] = softmax(-candidate_distances(graph)[candidates] / temperature)
    return probs


def nearest_player_predict(graph: PassGraph, temperature: float = TEMPERATURE_M):
    """Candidates ranked by ascending distance, with their pseudo-probabilities."""
    distances = candidate_distances(graph)
    candidates = graph.candidate_indices
    order = candidates[np.lexsort((candidates, distances[candidates]))]
    probs = nearest_player_proba(graph, temperature)
    return [(int(i), graph.player_ids[i], float(probs[i])) for i in order]


class NearestPlayerModel:
    name = "nearest"

    def __init__(self, temperature: float = TEMPERATURE_M):
        self.temperature = temperature

    def predict_proba(self, graph: PassGraph) -> np.ndarray:
        return nearest_player_proba(graph, self.temperature)

    def ranking(self, graph: PassGraph) -> np.ndarray:
        return rank_order(self.predict_proba(graph), graph.candidate_indices)
