"""Stability-based hyperparameter selection.

A width-3 window slides over the per-hyperparameter estimates; the window
with the smallest standard deviation is selected when the spread of
window deviations is large enough, otherwise the whole grid is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import ESTIMATORS, EstimateReport, EstimatorConfig
from .geometry import as_points
from .neighbors import knn_all


class TuningError(ValueError):
    """Grid infeasible for the dataset (too short after clipping)."""


@dataclass
class TuningGrid:
    values: np.ndarray    # ascending hyperparameter values
    estimates: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.estimates = np.asarray(self.estimates, dtype=float)
        if self.values.size != self.estimates.size or self.values.size < 3:
            raise TuningError("need at least 3 grid points")
        if np.any(np.diff(self.values) <= 0):
            raise TuningError("grid values must be strictly increasing")


def _pop_sd3(x) -> float:
    m = (x[0] + x[1] + x[2]) / 3.0
    return math.sqrt(((x[0] - m) ** 2 + (x[1] - m) ** 2 + (x[2] - m) ** 2) / 3.0)


def stable_window(grid: TuningGrid) -> tuple[int, int]:
    """1-based inclusive index range of the selected stable window.

    The first window attaining the minimal width-3 standard deviation wins;
    if the maximal window deviation does not exceed 1.25x the minimal one,
    the full range (1, k_max) is returned.
    """
    e = grid.estimates
    k_max = e.size
    s_min = math.inf
    s_max = 0.0
    k_star = 0
    for k in range(k_max - 2):
        s = _pop_sd3(e[k:k + 3])
        if s < s_min:
            s_min = s
            k_star = k
        if s > s_max:
            s_max = s
    if s_max > 1.25 * s_min:
        return (k_star + 1, k_star + 3)
    return (1, k_max)


GENERAL_K_GRID = (5, 10, 20, 30, 40, 50, 100)
DANCO_K_GRID = (4, 6, 8, 10, 12, 14, 16, 18, 20)
ALPHA_GRID = (1.2, 1.6, 2.0, 4.0, 6.0, 8.0, 10.0)


def default_grid(method: str, n: int):
    """Default hyperparameter grid for a method on an n-point dataset.

    K grids are clipped to K <= n/4 (and K <= n-1); the transport
    estimator tunes its split ratio instead.  Parameter-free methods
    return None.
    """
    if method == "twonn":
        return None
    if method == "wasserstein":
        vals = [a for a in ALPHA_GRID if n // (2 + 2 * a) >= 1]
    elif method == "danco":
        vals = [k for k in DANCO_K_GRID if k <= min(n // 4, n - 1)]
    else:
        vals = [k for k in GENERAL_K_GRID if k <= min(n // 4, n - 1)]
    if len(vals) < 3:
        raise TuningError(f"grid for {method} has fewer than 3 values at n={n}")
    return vals


def tuned_estimate(cloud, method: str, grid_values=None, seed: int = 0,
                   base_config: EstimatorConfig | None = None,
                   neighbors=None) -> EstimateReport:
    """Run an estimator across a grid and average over its stable window.

    Parameter-free methods are evaluated directly.  Deterministic given
    (cloud, method, grid, seed).
    """
    X = as_points(cloud)
    n = X.shape[0]
    cfg0 = base_config or EstimatorConfig(method=method, seed=seed)
    if method == "twonn":
        report = ESTIMATORS[method](X, cfg0, neighbors=neighbors)
        report.diagnostics["tuned"] = False
        return report
    values = list(grid_values) if grid_values is not None else default_grid(method, n)
    if len(values) < 3:
        raise TuningError("need at least 3 grid values")
    estimates = []
    if method == "wasserstein":
        for a in values:
            cfg = EstimatorConfig(method=method, alpha=float(a), splits=cfg0.splits,
                                  ground_metric=cfg0.ground_metric, seed=seed)
            estimates.append(ESTIMATORS[method](X, cfg).d_hat)
    else:
        ks = [int(k) for k in values]
        if max(ks) > n - 1:
            raise TuningError("grid K exceeds n-1")
        if neighbors is None or neighbors.k < max(ks):
            neighbors = knn_all(X, max(ks))
        for k in ks:
            cfg = EstimatorConfig(method=method, K=k, seed=seed,
                                  aggregation=cfg0.aggregation, danco=cfg0.danco)
            estimates.append(ESTIMATORS[method](X, cfg, neighbors=neighbors).d_hat)
    grid = TuningGrid(values=np.asarray(values, dtype=float),
                      estimates=np.asarray(estimates))
    k1, k2 = stable_window(grid)
    d_hat = float(np.mean(grid.estimates[k1 - 1:k2]))
    return EstimateReport(
        d_hat=d_hat, method=method, locals=None, config=cfg0,
        diagnostics={"tuned": True, "window": (k1, k2),
                     "grid_values": grid.values, "grid_estimates": grid.estimates})
