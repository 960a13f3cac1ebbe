"""Exact neighbor queries over scattered points.

Thin wrapper around a kd-tree providing the two query primitives the rest of
the package needs: k-th nearest-neighbor distances (for adaptive bandwidths)
and closed-ball radius searches (for sparse weight assembly and kriging
neighborhoods). Queries are exact; results match a brute-force scan.
"""

import numpy as np
from scipy.spatial import cKDTree


def as_points(coords):
    """Validate and return an (n, d) float64 coordinate array."""
    pts = np.asarray(coords, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("point set must be a nonempty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


class SpatialIndex:
    """Immutable kd-tree over a fixed point set.

    Safe for concurrent read-only queries. Point ids refer to row order of
    the coordinate array passed at construction.
    """

    def __init__(self, coords):
        self.points = as_points(coords)
        self.n, self.dim = self.points.shape
        self._tree = cKDTree(self.points)

    def knn_distance(self, query, k, exclude_self=False):
        """Distance from `query` to its k-th nearest indexed point.

        With `exclude_self`, a single indexed point coinciding exactly with
        the query is skipped, so the result is the k-th neighbor distance in
        the usual self-excluding sense. Ties share the k-th distance value.
        """
        query = np.asarray(query, dtype=np.float64).ravel()
        if not np.all(np.isfinite(query)):
            raise ValueError("query coordinates must be finite")
        limit = self.n - 1 if exclude_self else self.n
        if not 1 <= k <= limit:
            raise ValueError(f"k={k} out of range for n={self.n} indexed points")
        if exclude_self:
            dists, _ = self._tree.query(query, k=k + 1)
            dists = np.atleast_1d(dists)
            if dists[0] == 0.0:
                return float(dists[k])
            return float(dists[k - 1])
        dists, _ = self._tree.query(query, k=k)
        return float(np.atleast_1d(dists)[-1])

    def radius_neighbors(self, query, radius):
        """Point ids and distances within the closed ball of `radius`.

        Returns (ids, distances) sorted by ascending distance, ties broken
        by ascending id. The boundary is inclusive (distance == radius hits).
        """
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        query = np.asarray(query, dtype=np.float64).ravel()
        ids = np.asarray(self._tree.query_ball_point(query, radius), dtype=np.intp)
        if ids.size == 0:
            return ids, np.empty(0)
        dists = np.linalg.norm(self.points[ids] - query, axis=1)
        keep = dists <= radius
        ids, dists = ids[keep], dists[keep]
        order = np.lexsort((ids, dists))
        return ids[order], dists[order]


def build_index(coords):
    """Build an exact spatial index over the given coordinates."""
    return SpatialIndex(coords)
