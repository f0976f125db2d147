"""Flag-complex filtrations and Betti curves over Z/2.

The order complex of a symmetric matrix is the complete graph filtered by
the edge ranking; its flag (clique) complex is expanded up to the dimension
needed for the requested homology, and a single boundary-matrix reduction
yields the persistence pairs from which every Betti curve value is read
off.  Everything is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import ContractError, ResourceError
from .matrix import (
    DEFAULT_GUARD,
    DESCENDING,
    EdgeFiltration,
    SymmetricMatrix,
    check_guard,
    edge_order,
)

#: Refuse flag expansions that would enumerate more simplices than this.
DEFAULT_BUDGET = 2_000_000


@dataclass(frozen=True)
class SimplexFiltration:
    """Flag filtration of the order complex, truncated at ``max_dim``.

    ``simplices[d]`` holds the d-simplices as rows of sorted vertex ids,
    ordered by (birth, vertex tuple); ``births[d]`` gives each simplex's
    filtration step, i.e. the number of edges present when it appears.
    A simplex is born with its last edge (flag rule), so vertices have
    birth 0 and the edge at position p has birth p + 1.
    """

    n: int
    max_dim: int
    simplices: tuple[np.ndarray, ...]
    births: tuple[np.ndarray, ...]

    @property
    def n_edges(self) -> int:
        return self.births[1].size if self.max_dim >= 1 else 0

    def counts(self) -> list[int]:
        return [b.size for b in self.births]


@dataclass(frozen=True)
class BettiCurves:
    """Betti numbers of the growing flag complex, indexed by edge count.

    ``curves[k][v]`` is the rank of the k-th Z/2 homology group of the
    complex restricted to simplices with birth <= v, for v = 0..n_edges.
    The edge-count index is canonical; ``densities`` exposes the
    normalized axis v / n_edges for reporting.
    """

    n: int
    n_edges: int
    k_max: int
    curves: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.curves, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "curves", arr)

    def curve(self, k: int) -> np.ndarray:
        self._check_k(k)
        return self.curves[k]

    @property
    def densities(self) -> np.ndarray:
        if self.n_edges == 0:
            return np.zeros(1)
        return np.arange(self.n_edges + 1) / self.n_edges

    def _check_k(self, k: int) -> None:
        if not 0 <= k <= self.k_max:
            raise ContractError(f"homology dimension k={k} outside computed range 0..{self.k_max}")


@dataclass(frozen=True)
class FeatureTopology:
    """The graph formed by the first ``v`` edges of an edge filtration."""

    n: int
    v: int
    edges: np.ndarray


def flag_filtration(ef: EdgeFiltration, max_dim: int, budget: int = DEFAULT_BUDGET) -> SimplexFiltration:
    """Expand the edge filtration into its flag complex up to ``max_dim``.

    Every clique of size <= max_dim + 1 of the complete graph appears,
    born at the step its last edge enters.  The total simplex count is
    known a priori (binomials of n), so the budget check happens before
    any enumeration.
    """
    if max_dim < 1:
        raise ContractError(f"max_dim must be >= 1, got {max_dim}")
    n = ef.n
    total = sum(comb(n, d + 1) for d in range(max_dim + 1))
    if budget is not None and total > budget:
        raise ResourceError(
            f"flag expansion of n={n} to dimension {max_dim} enumerates {total} simplices; "
            f"requires budget >= {total}, configured {budget}"
        )

    simplices: list[np.ndarray] = [np.arange(n, dtype=np.int64).reshape(n, 1)]
    births: list[np.ndarray] = [np.zeros(n, dtype=np.int64)]
    simplices.append(ef.edges)
    births.append(np.arange(1, ef.n_edges + 1, dtype=np.int64))

    if max_dim >= 2:
        higher: list[list[tuple[tuple[int, ...], int]]] = [[] for _ in range(max_dim - 1)]
        adj: list[set[int]] = [set() for _ in range(n)]
        for pos in range(ef.n_edges):
            a = int(ef.edges[pos, 0])
            b = int(ef.edges[pos, 1])
            birth = pos + 1
            common = adj[a] & adj[b]
            # every clique S inside `common` spawns the simplex S + {a, b}
            stack = [((u,), {w for w in common if w > u and w in adj[u]}) for u in common]
            for clique in stack:
                higher[len(clique[0]) - 1].append((tuple(sorted((a, b) + clique[0])), birth))
            while stack:
                base, cand = stack.pop()
                if len(base) >= max_dim - 1:
                    continue
                for u in cand:
                    grown = base + (u,)
                    higher[len(grown) - 1].append((tuple(sorted((a, b) + grown)), birth))
                    if len(grown) < max_dim - 1:
                        stack.append((grown, {w for w in cand if w > u and w in adj[u]}))
            adj[a].add(b)
            adj[b].add(a)
        for d_minus_2, items in enumerate(higher):
            d = d_minus_2 + 2
            items.sort(key=lambda sb: (sb[1], sb[0]))
            if items:
                simplices.append(np.array([sb[0] for sb in items], dtype=np.int64))
                births.append(np.array([sb[1] for sb in items], dtype=np.int64))
            else:
                simplices.append(np.zeros((0, d + 1), dtype=np.int64))
                births.append(np.zeros(0, dtype=np.int64))

    return SimplexFiltration(n=n, max_dim=max_dim, simplices=tuple(simplices), births=tuple(births))


def betti_curves(sf: SimplexFiltration, k_max: int) -> BettiCurves:
    """Betti curves beta_k(v) for k = 0..k_max at every filtration step.

    Standard persistence algorithm: columns of the boundary matrix are
    reduced in filtration order with Z/2 coefficients (bitmask ints),
    processed one dimension at a time from the top down so that the
    clearing shortcut can skip columns already known to be cycles.
    beta_k(v) then counts the k-dimensional classes with birth <= v and
    death > v.
    """
    if k_max < 0:
        raise ContractError(f"k_max must be >= 0, got {k_max}")
    if sf.max_dim < k_max + 1:
        raise ContractError(
            f"filtration only retains dimension <= {sf.max_dim}; homology up to k={k_max} "
            f"needs simplices of dimension {k_max + 1}"
        )
    n_steps = sf.n_edges

    # deaths[k]: positive k-simplex index -> birth step of its killing cofacet
    deaths: dict[int, dict[int, int]] = {}
    # essential creators found while reducing each dimension's own boundary
    essentials: dict[int, set[int]] = {}
    cleared: set[int] = set()

    for d in range(min(sf.max_dim, k_max + 1), 0, -1):
        verts = [tuple(map(int, row)) for row in sf.simplices[d]]
        face_index = {tuple(map(int, row)): i for i, row in enumerate(sf.simplices[d - 1])}
        births_d = sf.births[d]
        pivot: dict[int, int] = {}
        pair_death: dict[int, int] = {}
        positive: set[int] = set()
        for j, vs in enumerate(verts):
            if j in cleared:
                continue
            col = 0
            for face in combinations(vs, d):
                col |= 1 << face_index[face]
            while col:
                low = col.bit_length() - 1
                other = pivot.get(low)
                if other is None:
                    pivot[low] = col
                    pair_death[low] = int(births_d[j])
                    break
                col ^= other
            else:
                positive.add(j)
        deaths[d - 1] = pair_death
        cleared = set(pair_death)
        if d <= k_max:
            essentials[d] = positive

    curves = np.zeros((k_max + 1, n_steps + 1), dtype=np.int64)
    for k in range(k_max + 1):
        diff = np.zeros(n_steps + 2, dtype=np.int64)
        died = deaths.get(k, {})
        if k == 0:
            diff[0] += sf.n
            for dv in died.values():
                diff[dv] -= 1
        else:
            births_k = sf.births[k]
            for i, dv in died.items():
                diff[births_k[i]] += 1
                diff[dv] -= 1
            for i in essentials.get(k, ()):
                diff[births_k[i]] += 1
        curves[k] = np.cumsum(diff)[: n_steps + 1]
    return BettiCurves(n=sf.n, n_edges=n_steps, k_max=k_max, curves=curves)


def starting_edge_density(bc: BettiCurves, k: int):
    """Smallest edge count v with beta_k(v) != 0, or None if beta_k is flat zero."""
    bc._check_k(k)
    nz = np.flatnonzero(bc.curves[k])
    return int(nz[0]) if nz.size else None


def max_betti(bc: BettiCurves, k: int) -> int:
    """Largest value of beta_k over the whole filtration."""
    bc._check_k(k)
    return int(bc.curves[k].max())


def feature_topology(ef: EdgeFiltration, v: int) -> FeatureTopology:
    """The first v edges of the filtration: the top-v relation graph."""
    if not 0 <= v <= ef.n_edges:
        raise ContractError(f"v must be in 0..{ef.n_edges}, got {v}")
    edges = ef.edges[:v].copy()
    edges.setflags(write=False)
    return FeatureTopology(n=ef.n, v=v, edges=edges)


def betti_curves_of(
    matrix,
    k_max: int = 1,
    ordering: str = DESCENDING,
    guard: int | None = DEFAULT_GUARD,
    budget: int = DEFAULT_BUDGET,
) -> BettiCurves:
    """Full pipeline from a symmetric matrix to its Betti curves."""
    if not isinstance(matrix, SymmetricMatrix):
        matrix = SymmetricMatrix(matrix)
    check_guard(matrix.n, guard)
    ef = edge_order(matrix, ordering)
    sf = flag_filtration(ef, max_dim=k_max + 1, budget=budget)
    return betti_curves(sf, k_max)
