"""Static spatial index over a point cloud (radius and nearest queries).

Backed by scipy's kd-tree, which is exact: radius queries return the
closed ball (distance <= r) and nearest queries the true minimum, so
results are interchangeable with brute force. All query methods are
read-only and safe to call from concurrent workers.
"""

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyCloud
from .model import PointCloud


class SpatialIndex:
    """Immutable kd-partition over the points of one PointCloud."""

    def __init__(self, points):
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        if self.points.shape[0] == 0:
            raise EmptyCloud("cannot index an empty cloud")
        self._tree = cKDTree(self.points, leafsize=16)

    def __len__(self):
        return self.points.shape[0]

    def radius_query(self, center, radius):
        """Indices with distance <= radius from center, ascending."""
        idx = self._tree.query_ball_point(np.asarray(center, dtype=np.float64),
                                          float(radius), return_sorted=True)
        return np.asarray(idx, dtype=np.int64)

    def radius_query_many(self, centers, radii, workers=1):
        """Batched radius query; radii may be scalar or per-center.

        Returns a list of ascending index arrays, one per center.
        """
        out = self._tree.query_ball_point(np.asarray(centers, dtype=np.float64),
                                          radii, return_sorted=True, workers=workers)
        return [np.asarray(ix, dtype=np.int64) for ix in out]

    def nearest_distance(self, q):
        d, _ = self._tree.query(np.asarray(q, dtype=np.float64))
        return float(d)

    def nearest_distance_many(self, queries, workers=1):
        d, _ = self._tree.query(np.asarray(queries, dtype=np.float64), workers=workers)
        return np.asarray(d, dtype=np.float64)

    def nearest_index_many(self, queries, workers=1):
        d, i = self._tree.query(np.asarray(queries, dtype=np.float64), workers=workers)
        return np.asarray(d, dtype=np.float64), np.asarray(i, dtype=np.int64)


def build_index(cloud: PointCloud) -> SpatialIndex:
    """Index all points of the cloud; duplicates are retained."""
    return SpatialIndex(cloud.points)


def radius_query(index: SpatialIndex, center, radius):
    return index.radius_query(center, radius)


def nearest_distance(index: SpatialIndex, q) -> float:
    return index.nearest_distance(q)
