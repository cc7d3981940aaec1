"""Road graph inference from fleet GNSS traces and semantic points."""

from ._core import (
    Error,
    FormatError,
    InvalidInputError,
    InvariantError,
    IoError,
    NotFoundError,
    RoadGraph,
    SyntheticFleet,
    config_snapshot,
    edge_transition_prob,
    geo_metric,
    ground_truth,
    infer,
    itopo_metric,
    sha256_hex,
    skeletonize_guo_hall,
    skeletonize_zhang_suen,
    synthetic_fleet,
)

__all__ = [
    "Error",
    "FormatError",
    "InvalidInputError",
    "InvariantError",
    "IoError",
    "NotFoundError",
    "RoadGraph",
    "SyntheticFleet",
    "config_snapshot",
    "edge_transition_prob",
    "geo_metric",
    "ground_truth",
    "infer",
    "itopo_metric",
    "sha256_hex",
    "skeletonize_guo_hall",
    "skeletonize_zhang_suen",
    "synthetic_fleet",
]
