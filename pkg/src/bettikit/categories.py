"""Category-side statistics: image organization to distinguishability.

Each raw image is symmetrized as I + I.T and reduced to the maximum of its
Betti curve; the per-category histograms of that maximum are compared with
a base-2 Jensen-Shannon divergence, giving a symmetric category-distance
matrix whose row sums rank how separable each category is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ContractError, DataError
from .filters import Histogram
from .matrix import DEFAULT_GUARD, DESCENDING, symmetrize_add
from .topology import DEFAULT_BUDGET, betti_curves_of, max_betti


@dataclass(frozen=True)
class CategoryImageSet:
    """Raw images belonging to one category."""

    category: object
    images: tuple

    def __post_init__(self):
        imgs = tuple(np.asarray(im, dtype=np.float64) for im in self.images)
        if not imgs:
            raise ContractError("a category needs at least one image")
        object.__setattr__(self, "images", imgs)

    @property
    def n_images(self) -> int:
        return len(self.images)


def image_max_betti(
    image,
    k: int = 1,
    ordering: str = DESCENDING,
    guard: int | None = DEFAULT_GUARD,
    budget: int = DEFAULT_BUDGET,
) -> int:
    """Maximum of the k-Betti curve of one symmetrized raw image."""
    bc = betti_curves_of(symmetrize_add(image), k_max=k, ordering=ordering, guard=guard, budget=budget)
    return max_betti(bc, k)


def mbc_distribution(
    cis: CategoryImageSet,
    k: int = 1,
    bin_width: int = 1,
    ordering: str = DESCENDING,
    guard: int | None = DEFAULT_GUARD,
    budget: int = DEFAULT_BUDGET,
) -> Histogram:
    """Histogram of Betti-curve maxima over a category's images."""
    maxima = [image_max_betti(im, k=k, ordering=ordering, guard=guard, budget=budget) for im in cis.images]
    return Histogram.from_values(maxima, bin_width=bin_width)


def _fraction_probs(h: Histogram) -> dict:
    total = h.total
    if total < 1:
        raise ContractError("histogram is empty")
    return {label: Fraction(count, total) for label, count in h.counts.items()}


def _kl_bits(probs: dict, mix: dict) -> Fraction:
    # Kullback-Leibler divergence in bits, accumulated as exact rationals:
    # the float log of each ratio is re-embedded as a Fraction, so equal
    # inputs give exactly 0 and disjoint supports give exactly 1 downstream.
    acc = Fraction(0)
    for label, p in probs.items():
        if p == 0:
            continue
        ratio = p / mix[label]
        if ratio == 1:
            continue
        acc += p * Fraction(math.log2(float(ratio)))
    return acc


def category_distance(p: Histogram, q: Histogram) -> float:
    """Jensen-Shannon divergence between two histograms, base 2, in [0, 1].

    Bins are aligned by the union of labels (the None sentinel counts as a
    label like any other); both histograms must use the same bin width.
    Exactly 0 for equal distributions, exactly 1 for disjoint supports.
    """
    if p.bin_width != q.bin_width:
        raise ContractError(f"histograms use different bin widths: {p.bin_width} vs {q.bin_width}")
    pp = _fraction_probs(p)
    qq = _fraction_probs(q)
    labels = set(pp) | set(qq)
    half = Fraction(1, 2)
    mix = {label: (pp.get(label, 0) + qq.get(label, 0)) * half for label in labels}
    return float((_kl_bits(pp, mix) + _kl_bits(qq, mix)) * half)


@dataclass(frozen=True)
class CdMatrix:
    """Symmetric matrix of pairwise category distances, zero diagonal."""

    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1] or vals.shape[0] != len(labels):
            raise ContractError(f"need a square matrix matching {len(labels)} labels, got {vals.shape}")
        if len(set(labels)) != len(labels):
            raise ContractError("duplicate category ids")
        if not np.array_equal(vals, vals.T):
            raise DataError("category-distance matrix must be exactly symmetric")
        if np.any(vals.diagonal() != 0):
            raise DataError("category-distance matrix must have a zero diagonal")
        if np.any(vals < 0) or np.any(vals > 1):
            raise DataError("category distances must lie in [0, 1]")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.labels)

    def degrees(self) -> np.ndarray:
        """Distinguishable degree of every category (row sums)."""
        return self.values.sum(axis=1)


def cd_matrix(dists: Sequence) -> CdMatrix:
    """Pairwise category distances for an ordered list of (id, Histogram)."""
    if len(dists) < 2:
        raise ContractError("need at least 2 categories for a distance matrix")
    labels = tuple(cat for cat, _ in dists)
    if len(set(labels)) != len(labels):
        raise ContractError("duplicate category ids")
    hists = [h for _, h in dists]
    n = len(hists)
    vals = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            cd = category_distance(hists[i], hists[j])
            vals[i, j] = cd
            vals[j, i] = cd
    return CdMatrix(labels=labels, values=vals)


def distinguishable_degree(c: CdMatrix, category) -> float:
    """How separable one category is from all others: its row sum."""
    try:
        idx = c.labels.index(category)
    except ValueError:
        raise ContractError(f"unknown category id {category!r}") from None
    return float(c.values[idx].sum())
