"""Exact k-nearest-neighbor queries over a point cloud.

Brute-force Euclidean search is the reference implementation: distances
are returned exactly as computed from coordinate differences, ties are
broken by ascending point index, and a point is never its own neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import as_points


@dataclass
class NeighborSet:
    """Ordered neighbors of one point, closest first."""

    center_index: int
    indices: np.ndarray
    distances: np.ndarray


class NeighborTable:
    """Per-point neighbor arrays behaving as a sequence of NeighborSet."""

    def __init__(self, indices: np.ndarray, distances: np.ndarray):
        self.indices = indices
        self.distances = distances

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __getitem__(self, i: int) -> NeighborSet:
        return NeighborSet(center_index=i,
                           indices=self.indices[i].copy(),
                           distances=self.distances[i].copy())

    def truncated(self, k: int) -> "NeighborTable":
        """View of the first k neighbors (same ordering, same tie-breaks)."""
        if not 1 <= k <= self.k:
            raise ValueError(f"k must be in [1, {self.k}]")
        return NeighborTable(self.indices[:, :k], self.distances[:, :k])


def knn_all(cloud, K: int, chunk_rows: int = 256) -> NeighborTable:
    """Exact K nearest neighbors of every point, in ambient Euclidean distance.

    Args:
        cloud: PointCloud or n x p matrix.
        K: neighborhood size, 1 <= K <= n - 1.
        chunk_rows: rows of the distance matrix held in memory at once.

    Returns:
        NeighborTable with (n, K) index and distance arrays, neighbors
        ordered closest to farthest, distance ties ordered by index.
    """
    X = as_points(cloud)
    n = X.shape[0]
    if not 1 <= K <= n - 1:
        raise ValueError(f"K must be in [1, {n - 1}]")
    indices = np.empty((n, K), dtype=np.int64)
    distances = np.empty((n, K), dtype=float)
    for start in range(0, n, chunk_rows):
        stop = min(start + chunk_rows, n)
        diff = X[start:stop, None, :] - X[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        rows = np.arange(start, stop)
        dist[rows - start, rows] = -1.0  # center sorts first, then dropped
        order = np.argsort(dist, axis=1, kind="stable")  # stable = index ties ascend
        picked = order[:, 1:K + 1]
        indices[start:stop] = picked
        distances[start:stop] = np.take_along_axis(dist, picked, axis=1)
    return NeighborTable(indices=indices, distances=distances)
