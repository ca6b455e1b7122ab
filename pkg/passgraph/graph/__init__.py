from passgraph.graph.batching import GraphBatch
from passgraph.graph.builder import (
    EDGE_FEATURES,
    NODE_FEATURES,
    FeatureScaler,
    PassGraph,
    apply_scaler,
    build_graph,
    build_scaled_graph,
    fit_scaler,
)
from passgraph.graph.geometry import (
    GeometryConfig,
    lane_traffic,
    pressure_count,
    signed_angle,
)
