"""Analytic point-cloud fixtures so experiments need no external datasets.

All generators are seeded and return clouds with normals. The sheets
fixture reproduces the close-layers failure case: two parallel square
sheets separated by an adjustable gap, optionally with Gaussian noise so
the curvature field has nondegenerate percentiles.
"""

import numpy as np

from .model import PointCloud


def sphere_cloud(count=50000, radius=0.3, seed=0) -> PointCloud:
    """Uniform samples on a sphere centered at the origin."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return PointCloud(v * radius, v)


def cube_cloud(count=50000, side=1.0, seed=0) -> PointCloud:
    """Area-uniform samples on the surface of an axis-aligned cube."""
    rng = np.random.default_rng(seed)
    face = rng.integers(0, 6, size=count)
    uv = rng.random(size=(count, 2)) - 0.5
    pts = np.empty((count, 3))
    nrm = np.zeros((count, 3))
    axis = face // 2
    sign = np.where(face % 2 == 0, 1.0, -1.0)
    others = np.array([[1, 2], [0, 2], [0, 1]])
    rows = np.arange(count)
    pts[rows, axis] = 0.5 * sign
    pts[rows, others[axis, 0]] = uv[:, 0]
    pts[rows, others[axis, 1]] = uv[:, 1]
    nrm[rows, axis] = sign
    return PointCloud(pts * side, nrm)


def sheets_cloud(count=50000, gap=0.045, side=1.0, noise=0.0, seed=0) -> PointCloud:
    """Two parallel square sheets at z = +/- gap/2.

    The first half of the points lies on the upper sheet, the second half
    on the lower (sheet_membership recovers this split). noise is the
    standard deviation of isotropic Gaussian jitter.
    """
    rng = np.random.default_rng(seed)
    half = count // 2
    counts = (half, count - half)
    offsets = (gap / 2.0, -gap / 2.0)
    pieces, normals = [], []
    for m, z in zip(counts, offsets):
        xy = (rng.random(size=(m, 2)) - 0.5) * side
        pts = np.column_stack([xy, np.full(m, z)])
        if noise > 0:
            pts = pts + rng.normal(scale=noise, size=pts.shape)
        pieces.append(pts)
        nrm = np.zeros((m, 3))
        nrm[:, 2] = np.sign(z) if z != 0 else 1.0
        normals.append(nrm)
    return PointCloud(np.vstack(pieces), np.vstack(normals))


def sheet_membership(cloud_size: int):
    """Index split of sheets_cloud: (upper sheet indices, lower sheet indices)."""
    half = cloud_size // 2
    return np.arange(half), np.arange(half, cloud_size)


def make_fixture(shape, count=50000, seed=0, radius=0.3, side=1.0,
                 gap=0.045, noise=0.0) -> PointCloud:
    if shape == "sphere":
        return sphere_cloud(count=count, radius=radius, seed=seed)
    if shape == "cube":
        return cube_cloud(count=count, side=side, seed=seed)
    if shape == "sheets":
        return sheets_cloud(count=count, gap=gap, side=side, noise=noise, seed=seed)
    raise ValueError(f"unknown fixture shape {shape!r}")
