"""Geometric and random symmetric-matrix generators.

Distance matrices of sampled point clouds are the low-complexity reference
family; matrices with i.i.d. random entries are the null model that no
point configuration can imitate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DataError
from .matrix import SymmetricMatrix


@dataclass(frozen=True)
class PointCloud:
    """n points in d-dimensional Euclidean space."""

    coordinates: np.ndarray  # (n, d)

    def __post_init__(self):
        arr = np.asarray(self.coordinates, dtype=np.float64)
        if arr.ndim != 2:
            raise ContractError(f"coordinates must be (n, d), got shape {arr.shape}")
        if arr.shape[0] < 2 or arr.shape[1] < 1:
            raise ContractError(f"need n >= 2 points and d >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("point cloud has non-finite coordinates")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coordinates", arr)

    @property
    def n(self) -> int:
        return self.coordinates.shape[0]

    @property
    def d(self) -> int:
        return self.coordinates.shape[1]


def sample_point_cloud(n: int, d: int, seed: int) -> PointCloud:
    """n points i.i.d. uniform on the unit cube [0,1]^d, reproducible by seed."""
    if n < 2 or d < 1:
        raise ContractError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    return PointCloud(rng.random((n, d)))


def geometric_matrix(pc: PointCloud) -> SymmetricMatrix:
    """Pairwise Euclidean distance matrix of a point cloud."""
    x = pc.coordinates
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    np.fill_diagonal(dist, 0.0)
    return SymmetricMatrix(dist)


def random_symmetric(n: int, seed: int) -> SymmetricMatrix:
    """Symmetric matrix with i.i.d. U[0,1) upper triangle, zero diagonal."""
    if n < 2:
        raise ContractError(f"need n >= 2, got n={n}")
    rng = np.random.default_rng(seed)
    vals = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    vals[iu] = rng.random(iu[0].size)
    vals = vals + vals.T
    return SymmetricMatrix(vals)
