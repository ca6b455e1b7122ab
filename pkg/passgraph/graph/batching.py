from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from passgraph.graph.builder import EDGE_FEATURES, NODE_FEATURES, PassGraph
from passgraph.utils.errors import EmptyInput, MissingLabel, ShapeMismatch


@dataclass(frozen=True, eq=False)
class GraphBatch:
    """
    Disjoint union of star graphs.

    Node indices are global; ``graph_offsets[g]:graph_offsets[g + 1]`` are
    the nodes of graph ``g``. Edge endpoints are shifted accordingly.
    """

    node_features: np.ndarray
    edge_features: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    graph_offsets: np.ndarray  # (B + 1,)
    candidate_mask: np.ndarray
    passer_index: np.ndarray  # (B,) global
    labels: np.ndarray | None  # (B,) global, None when any graph is unlabelled
    graphs: tuple[PassGraph, ...]

    @classmethod
    def from_graphs(cls, graphs) -> "GraphBatch":
        graphs = tuple(graphs)
        if not graphs:
            raise EmptyInput("cannot batch zero graphs")
        for g in graphs:
            if g.node_features.shape[1] != len(NODE_FEATURES):
                raise ShapeMismatch(
                    f"graph {g.pass_id}: node width {g.node_features.shape[1]},"
                    f" expected {len(NODE_FEATURES)}"
                )
            if g.edge_features.shape[1] != len(EDGE_FEATURES):
                raise ShapeMismatch(
                    f"graph {g.pass_id}: edge width {g.edge_features.shape[1]},"
                    f" expected {len(EDGE_FEATURES)}"
                )
        sizes = np.array([g.num_nodes for g in graphs])
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        edge_index = np.concatenate(
            [g.edge_index + off for g, off in zip(graphs, offsets[:-1])]
        )
        labelled = all(g.label_index is not None for g in graphs)
        return cls(
            node_features=np.concatenate([g.node_features for g in graphs]),
            edge_features=np.concatenate([g.edge_features for g in graphs]),
            src=edge_index[:, 0],
            dst=edge_index[:, 1],
            graph_offsets=offsets,
            candidate_mask=np.concatenate([g.candidate_mask for g in graphs]),
            passer_index=np.array([g.passer_index for g in graphs]) + offsets[:-1],
            labels=(
                np.array([g.label_index for g in graphs]) + offsets[:-1]
                if labelled
                else None
            ),
            graphs=graphs,
        )

    @property
    def num_graphs(self) -> int:
        return len(self.graphs)

    @property
    def num_nodes(self) -> int:
        return int(self.graph_offsets[-1])

    @property
    def num_edges(self) -> int:
        return self.src.shape[0]

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            missing = [g.pass_id for g in self.graphs if g.label_index is None]
            raise MissingLabel(f"no receiver label for passes {missing[:5]}")
        return self.labels

    @cached_property
    def node_graph(self) -> np.ndarray:
        sizes = np.diff(self.graph_offsets)
        return np.repeat(np.arange(self.num_graphs), sizes)

    # ----- sparse scatter operators, (nodes x edges)

    def _incidence(self, index: np.ndarray) -> sparse.csr_matrix:
        m = self.num_edges
        return sparse.csr_matrix(
            (np.ones(m), (index, np.arange(m))), shape=(self.num_nodes, m)
        )

    @cached_property
    def src_incidence(self) -> sparse.csr_matrix:
        return self._incidence(self.src)

    @cached_property
    def dst_incidence(self) -> sparse.csr_matrix:
        return self._incidence(self.dst)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.num_nodes).astype(np.float64)

    # ----- contiguous segments of edges grouped by destination

    @cached_property
    def dst_order(self) -> np.ndarray:
        # stable, so ties inside a segment keep ascending edge index
        return np.argsort(self.dst, kind="stable")

    @cached_property
    def dst_segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(nodes with incoming edges, segment starts, segment id per sorted edge)."""
        sorted_dst = self.dst[self.dst_order]
        nodes, starts = np.unique(sorted_dst, return_index=True)
        lengths = np.diff(np.append(starts, len(sorted_dst)))
        seg_id = np.repeat(np.arange(len(nodes)), lengths)
        return nodes, starts, seg_id

    def scatter_src(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(self.src_incidence @ values)

    def scatter_dst(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(self.dst_incidence @ values)

    def per_graph(self, values: np.ndarray) -> list[np.ndarray]:
        return [
            values[a:b] for a, b in zip(self.graph_offsets[:-1], self.graph_offsets[1:])
        ]
