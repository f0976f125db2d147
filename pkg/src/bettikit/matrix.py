"""Symmetric matrices, symmetrization transforms, and edge orderings.

The topology pipeline consumes a symmetric matrix only through the total
order it induces on the off-diagonal entries, so everything downstream is
invariant under entrywise strictly increasing transforms of the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DataError, DimensionError, ResourceError

DEFAULT_GUARD = 140

DESCENDING = "descending"
ASCENDING = "ascending"


def _as_2d_float(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{what} must be 2-dimensional, got shape {arr.shape}")
    return arr


def _require_square(arr: np.ndarray, what: str) -> None:
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {arr.shape}")


@dataclass(frozen=True)
class SymmetricMatrix:
    """Square real matrix with ``values == values.T`` (exact equality)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_2d_float(self.values, "symmetric matrix")
        _require_square(arr, "symmetric matrix")
        if not np.array_equal(arr, arr.T):
            raise DataError("matrix is not exactly symmetric")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EdgeFiltration:
    """Total order over the off-diagonal entry positions of a symmetric matrix.

    ``edges[p] = (i, j)`` with ``i < j`` is the pair entering at step
    ``v = p + 1``; ``weights[p]`` is the matrix entry at that pair.  The
    list covers every unordered pair exactly once, so its length is
    ``n * (n - 1) / 2``.
    """

    n: int
    edges: np.ndarray  # (N, 2) int, each row i < j
    weights: np.ndarray  # (N,) float, monotone per `ordering`
    ordering: str = DESCENDING

    def __post_init__(self):
        object.__setattr__(self, "edges", np.ascontiguousarray(self.edges, dtype=np.int64))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        self.edges.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def __len__(self) -> int:
        return self.n_edges


def symmetrize_max(feature_map) -> SymmetricMatrix:
    """Entrywise max of a square feature map with its transpose.

    Keeps the larger of each mirrored pair, so the strongest responses
    survive the symmetrization; the diagonal is untouched.
    """
    arr = _as_2d_float(feature_map, "feature map")
    _require_square(arr, "feature map")
    return SymmetricMatrix(np.maximum(arr, arr.T))


def symmetrize_add(image) -> SymmetricMatrix:
    """Symmetrize a square raw image as ``I + I.T``."""
    arr = _as_2d_float(image, "image")
    _require_square(arr, "image")
    return SymmetricMatrix(arr + arr.T)


def check_guard(n: int, guard: int | None = DEFAULT_GUARD) -> None:
    """Refuse matrices whose flag-complex enumeration would blow up.

    ``guard=None`` (or a non-positive value) disables the check; callers
    expose that as an explicit override flag.
    """
    if guard is not None and guard > 0 and n > guard:
        raise ResourceError(
            f"matrix side {n} exceeds the dimension guard {guard}; "
            "raise or disable the guard to force the computation"
        )


def edge_order(matrix: SymmetricMatrix, ordering: str = DESCENDING) -> EdgeFiltration:
    """Order the off-diagonal upper-triangle entries by value.

    Descending puts the top values first (feature-map convention);
    ascending suits distance matrices where small entries mean strong
    relations.  Ties break deterministically by lexicographic (i, j).
    The diagonal is excluded: only pairwise entries map to edges.
    """
    if ordering not in (DESCENDING, ASCENDING):
        raise ContractError(f"ordering must be '{DESCENDING}' or '{ASCENDING}', got {ordering!r}")
    if not isinstance(matrix, SymmetricMatrix):
        matrix = SymmetricMatrix(matrix)
    n = matrix.n
    if n < 2:
        raise ContractError(f"need at least 2 vertices for an edge ordering, got n={n}")
    ii, jj = np.triu_indices(n, k=1)
    vals = matrix.values[ii, jj]
    if not np.all(np.isfinite(vals)):
        raise DataError("matrix has non-finite off-diagonal entries")
    key = -vals if ordering == DESCENDING else vals
    # lexsort: last key is primary, so sort by value, then i, then j
    perm = np.lexsort((jj, ii, key))
    edges = np.column_stack((ii[perm], jj[perm]))
    return EdgeFiltration(n=n, edges=edges, weights=vals[perm], ordering=ordering)
