"""Filter-side statistics: feature maps to entropies to pruning ranks.

A filter is judged by where its strong responses sit, not how strong they
are: each feature map is symmetrized (entrywise max with its transpose),
ranked, and reduced to the starting edge density of the chosen Betti
curve.  Category-level histograms of that quantity, their Shannon
entropies, and the entropy change over training snapshots drive the
effectiveness score and the pruning order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ContractError, DataError, DimensionError
from .matrix import DEFAULT_GUARD, DESCENDING, symmetrize_max
from .topology import DEFAULT_BUDGET, betti_curves_of, starting_edge_density


@dataclass(frozen=True)
class Histogram:
    """Integer-binned counts with a reserved bin for the None sentinel.

    Keys are bin labels: ``value // bin_width`` for integer observations,
    plus ``None`` for observations where the measured quantity does not
    exist (a Betti curve that never leaves zero).
    """

    counts: dict
    bin_width: int = 1

    def __post_init__(self):
        if not isinstance(self.bin_width, int) or self.bin_width < 1:
            raise ContractError(f"bin_width must be a positive integer, got {self.bin_width!r}")
        clean = {}
        for label, count in self.counts.items():
            if label is not None and not isinstance(label, (int, np.integer)):
                raise DataError(f"histogram bin label must be int or None, got {label!r}")
            if not isinstance(count, (int, np.integer)) or count < 0:
                raise DataError(f"histogram count must be a non-negative integer, got {count!r}")
            if count:
                clean[None if label is None else int(label)] = int(count)
        object.__setattr__(self, "counts", clean)

    @classmethod
    def from_values(cls, values, bin_width: int = 1) -> "Histogram":
        """Bin a sequence of ints (or None sentinels) into counts."""
        if not isinstance(bin_width, int) or bin_width < 1:
            raise ContractError(f"bin_width must be a positive integer, got {bin_width!r}")
        counts: dict = {}
        for v in values:
            label = None if v is None else int(v) // bin_width
            counts[label] = counts.get(label, 0) + 1
        return cls(counts=counts, bin_width=bin_width)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def probabilities(self) -> dict:
        total = self.total
        if total < 1:
            raise ContractError("histogram is empty")
        return {label: count / total for label, count in self.counts.items()}


def entropy(h: Histogram) -> float:
    """Shannon entropy of a histogram in bits, with 0 * log 0 = 0.

    A degenerate (single-bin) histogram gives exactly 0.0; the maximum is
    log2 of the number of occupied bins.
    """
    probs = h.probabilities().values()
    return math.fsum(-p * math.log2(p) for p in probs if p > 0) + 0.0


@dataclass(frozen=True)
class CategoryFeatureSet:
    """Feature maps of the images of one category under one filter."""

    category: object
    maps: tuple

    def __post_init__(self):
        maps = tuple(np.asarray(m, dtype=np.float64) for m in self.maps)
        if not maps:
            raise ContractError("a category needs at least one feature map")
        shape = maps[0].shape
        for m in maps:
            if m.shape != shape:
                raise ContractError(f"feature maps differ in shape: {m.shape} vs {shape}")
        object.__setattr__(self, "maps", maps)

    @property
    def n_images(self) -> int:
        return len(self.maps)


def convolve(image, kernel) -> np.ndarray:
    """Valid-mode sliding dot product (cross-correlation, the CNN convention)."""
    img = np.asarray(image, dtype=np.float64)
    ker = np.asarray(kernel, dtype=np.float64)
    if img.ndim != 2 or ker.ndim != 2:
        raise DimensionError(f"image and kernel must be 2-D, got {img.shape} and {ker.shape}")
    if ker.shape[0] > img.shape[0] or ker.shape[1] > img.shape[1]:
        raise DimensionError(f"kernel {ker.shape} does not fit in image {img.shape}")
    if not np.all(np.isfinite(img)) or not np.all(np.isfinite(ker)):
        raise DataError("convolution inputs must be finite")
    windows = np.lib.stride_tricks.sliding_window_view(img, ker.shape)
    return np.einsum("ijkl,kl->ij", windows, ker)


def map_starting_density(
    feature_map,
    k: int = 1,
    ordering: str = DESCENDING,
    guard: int | None = DEFAULT_GUARD,
    budget: int = DEFAULT_BUDGET,
) -> int | None:
    """Starting edge density of one feature map (symmetrized, top values first)."""
    bc = betti_curves_of(symmetrize_max(feature_map), k_max=k, ordering=ordering, guard=guard, budget=budget)
    return starting_edge_density(bc, k)


def sed_distribution(
    cfs: CategoryFeatureSet,
    k: int = 1,
    bin_width: int = 1,
    ordering: str = DESCENDING,
    guard: int | None = DEFAULT_GUARD,
    budget: int = DEFAULT_BUDGET,
) -> Histogram:
    """Histogram of starting edge densities over a category's feature maps.

    Maps whose Betti curve never becomes nonzero land in the reserved None
    bin; probabilities are counts over the category's image count.
    """
    seds = [map_starting_density(m, k=k, ordering=ordering, guard=guard, budget=budget) for m in cfs.maps]
    return Histogram.from_values(seds, bin_width=bin_width)


@dataclass(frozen=True)
class EntropySeries:
    """Filter entropy of one category across training snapshots."""

    snapshots: tuple  # ((iteration, entropy_bits), ...)

    def __post_init__(self):
        snaps = tuple((int(t), float(h)) for t, h in self.snapshots)
        for (t0, h0), (t1, _) in zip(snaps, snaps[1:]):
            if t1 <= t0:
                raise ContractError(f"snapshot iterations must be strictly increasing: {t0} then {t1}")
        for t, h in snaps:
            if not (h >= 0):
                raise DataError(f"entropy must be non-negative, got {h} at iteration {t}")
        object.__setattr__(self, "snapshots", snaps)


def entropy_variation(es: EntropySeries) -> float:
    """Entropy change from the first to the last snapshot; negative means the
    distribution tightened and the filter learned the category."""
    if len(es.snapshots) < 2:
        raise ContractError("entropy variation needs at least 2 snapshots")
    return es.snapshots[-1][1] - es.snapshots[0][1]


def effective_set(deltas: Mapping) -> set:
    """Categories whose entropy strictly decreased (delta < 0)."""
    if not deltas:
        raise ContractError("need at least one category delta")
    return {cat for cat, dh in deltas.items() if dh < 0}


def ensemble_performance(deltas: Mapping) -> float:
    """Sum of entropy decreases over the effective set; always <= 0."""
    eff = effective_set(deltas)
    return sum(deltas[cat] for cat in eff) if eff else 0.0


@dataclass(frozen=True)
class FilterAssessment:
    """Per-category entropy deltas with the derived set and ensemble score."""

    deltas: dict
    effective: frozenset
    score: float

    @classmethod
    def from_deltas(cls, deltas: Mapping) -> "FilterAssessment":
        return cls(deltas=dict(deltas), effective=frozenset(effective_set(deltas)), score=ensemble_performance(deltas))


def prune_rank(scores: Mapping) -> list:
    """Filter ids sorted most effective first (ascending ensemble score).

    Ties break by id.  Pruning removes from the other end: reverse this
    list to get the prune order (least effective goes first).
    """
    if not scores:
        raise ContractError("need at least one filter score")
    return sorted(scores, key=lambda f: (scores[f], f))


def prune_order(scores: Mapping) -> list:
    """Order in which filters should be pruned: least effective first."""
    return list(reversed(prune_rank(scores)))
