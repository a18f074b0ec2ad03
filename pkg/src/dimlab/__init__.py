"""dimlab: manifold dimension estimators, samplers, and benchmark harness."""

from .estimators import (
    ESTIMATORS,
    METHODS,
    DancoOptions,
    EstimateReport,
    EstimatorConfig,
    estimate,
)
from .geometry import (
    CATALOG,
    ManifoldSpec,
    PointCloud,
    SampleConfig,
    catalog_spec,
    embed_linear,
    make_spec,
    sample_manifold,
)
from .neighbors import NeighborSet, NeighborTable, knn_all
from .numerics import RngStream
from .transport import w1_empirical
from .tuning import TuningGrid, default_grid, stable_window, tuned_estimate

__all__ = [
    "CATALOG",
    "DancoOptions",
    "ESTIMATORS",
    "EstimateReport",
    "EstimatorConfig",
    "METHODS",
    "ManifoldSpec",
    "NeighborSet",
    "NeighborTable",
    "PointCloud",
    "RngStream",
    "SampleConfig",
    "TuningGrid",
    "catalog_spec",
    "default_grid",
    "embed_linear",
    "estimate",
    "knn_all",
    "make_spec",
    "sample_manifold",
    "stable_window",
    "tuned_estimate",
    "w1_empirical",
]

__version__ = "0.1.0"
