import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bettikit.errors import ContractError, DataError, DimensionError
from bettikit.filters import (
    CategoryFeatureSet,
    EntropySeries,
    FilterAssessment,
    Histogram,
    convolve,
    effective_set,
    ensemble_performance,
    entropy,
    entropy_variation,
    map_starting_density,
    prune_order,
    prune_rank,
    sed_distribution,
)

from synth import planted_category, random_category

count_dicts = st.dictionaries(
    st.one_of(st.integers(-20, 60), st.none()), st.integers(1, 40), min_size=1, max_size=12
)


class TestConvolve:
    def test_window_sums(self):
        got = convolve(np.ones((3, 3)), np.ones((2, 2)))
        assert np.array_equal(got, 4 * np.ones((2, 2)))

    def test_scaling_kernel(self):
        img = np.arange(12, dtype=float).reshape(3, 4)
        assert np.array_equal(convolve(img, [[2.0]]), 2 * img)

    def test_delta_kernel_shifts(self):
        # direct sliding-window evaluation: a delta at (1, 1) of a 2x2 kernel
        # picks the bottom-right element of each window, i.e. img[1:, 1:]
        rng = np.random.default_rng(0)
        img = rng.random((5, 6))
        got = convolve(img, [[0.0, 0.0], [0.0, 1.0]])
        expect = np.empty((4, 5))
        for r in range(4):
            for c in range(5):
                window = img[r : r + 2, c : c + 2]
                expect[r, c] = (window * np.array([[0, 0], [0, 1]])).sum()
        assert np.array_equal(got, expect)
        assert np.array_equal(got, img[1:, 1:])

    def test_kernel_too_large(self):
        with pytest.raises(DimensionError):
            convolve(np.ones((3, 3)), np.ones((4, 2)))

    def test_output_shape(self):
        got = convolve(np.zeros((10, 8)), np.zeros((3, 5)))
        assert got.shape == (8, 4)


class TestHistogram:
    def test_from_values_counts(self):
        h = Histogram.from_values([4, 4, 5])
        assert h.counts == {4: 2, 5: 1}
        assert h.probabilities() == {4: 2 / 3, 5: 1 / 3}

    def test_none_sentinel_bin(self):
        h = Histogram.from_values([4, None])
        assert h.probabilities() == {4: 0.5, None: 0.5}

    def test_bin_width_groups_values(self):
        h = Histogram.from_values([0, 1, 2, 3, 4, 9], bin_width=3)
        assert h.counts == {0: 3, 1: 2, 3: 1}

    def test_bad_bin_width(self):
        with pytest.raises(ContractError):
            Histogram.from_values([1], bin_width=0)

    def test_negative_count_rejected(self):
        with pytest.raises(DataError):
            Histogram(counts={3: -1})

    def test_empty_probabilities_rejected(self):
        with pytest.raises(ContractError):
            Histogram(counts={}).probabilities()


class TestEntropy:
    def test_degenerate_is_exactly_zero(self):
        assert entropy(Histogram(counts={7: 123})) == 0.0

    def test_uniform_four_bins(self):
        assert entropy(Histogram(counts={0: 5, 1: 5, 2: 5, 3: 5})) == 2.0

    def test_dyadic(self):
        assert entropy(Histogram(counts={0: 2, 1: 1, 2: 1})) == 1.5

    @given(count_dicts)
    def test_bounds(self, counts):
        h = Histogram(counts=counts)
        val = entropy(h)
        assert val >= 0.0
        assert val <= math.log2(len(h.counts)) + 1e-12

    @given(count_dicts)
    def test_permutation_invariant_in_labels(self, counts):
        h = Histogram(counts=counts)
        shifted = Histogram(counts={(None if k is None else k + 13): v for k, v in counts.items()})
        assert entropy(h) == entropy(shifted)


class TestSedDistribution:
    def test_direct_counting(self):
        # three maps engineered to share one of two starting densities
        maps = planted_category(3, 12, seed=0, jitter=0.0)
        h = sed_distribution(CategoryFeatureSet("c", maps), k=1)
        assert h.total == 3
        assert h.counts == {8: 3}  # unjittered planted cycle of length 8

    def test_identical_maps_degenerate(self):
        fm = random_category(1, 10, seed=3)[0]
        h = sed_distribution(CategoryFeatureSet("c", [fm, fm, fm]), k=1)
        assert len(h.counts) == 1
        assert entropy(h) == 0.0

    def test_none_sentinel_counted(self):
        # 3x3 maps cannot carry a 1-dimensional hole
        maps = random_category(2, 3, seed=1)
        h = sed_distribution(CategoryFeatureSet("c", maps), k=1)
        assert h.counts == {None: 2}
        assert h.probabilities()[None] == 1.0

    def test_empty_category_rejected(self):
        with pytest.raises(ContractError):
            CategoryFeatureSet("c", [])

    def test_mixed_shapes_rejected(self):
        with pytest.raises(ContractError):
            CategoryFeatureSet("c", [np.zeros((4, 4)), np.zeros((5, 5))])

    def test_invariant_under_increasing_transform(self):
        maps = planted_category(6, 10, seed=2)
        base = sed_distribution(CategoryFeatureSet("c", maps), k=1)
        warped = sed_distribution(CategoryFeatureSet("c", [3.0 * m + 2.0 for m in maps]), k=1)
        assert base.counts == warped.counts

    def test_planted_beats_random(self):
        # directional separation at desk scale
        planted = sed_distribution(CategoryFeatureSet("p", planted_category(100, 14, seed=11)), k=1)
        rand = sed_distribution(CategoryFeatureSet("r", random_category(100, 14, seed=12)), k=1)
        assert entropy(planted) < entropy(rand)


class TestShiftRescaleInvariance:
    def test_image_shift_rescale_keeps_feature_order(self):
        # an affine image change passes through valid convolution as an
        # affine change of the feature map, so the ranked edges and the
        # starting density cannot move; integer data keeps floats exact
        from bettikit.matrix import edge_order, symmetrize_max

        rng = np.random.default_rng(21)
        image = rng.integers(0, 200, size=(16, 16)).astype(float)
        kernel = rng.integers(-3, 4, size=(5, 5)).astype(float)
        base_map = convolve(image, kernel)
        moved_map = convolve(3.0 * image + 7.0, kernel)
        a = edge_order(symmetrize_max(base_map))
        b = edge_order(symmetrize_max(moved_map))
        assert np.array_equal(a.edges, b.edges)
        assert map_starting_density(base_map) == map_starting_density(moved_map)


class TestEntropyVariation:
    def test_decrease_example(self):
        es = EntropySeries(((0, 3.25), (20, 2.92)))
        assert entropy_variation(es) == pytest.approx(-0.33)

    def test_increase_example(self):
        es = EntropySeries(((0, 2.75), (20, 2.93)))
        assert entropy_variation(es) == pytest.approx(+0.18)

    def test_constant_series(self):
        assert entropy_variation(EntropySeries(((0, 1.5), (1, 1.5), (2, 1.5)))) == 0.0

    def test_single_snapshot_rejected(self):
        with pytest.raises(ContractError):
            entropy_variation(EntropySeries(((0, 1.0),)))

    def test_non_increasing_iterations_rejected(self):
        with pytest.raises(ContractError):
            EntropySeries(((3, 1.0), (3, 2.0)))

    def test_negative_entropy_rejected(self):
        with pytest.raises(DataError):
            EntropySeries(((0, -0.1), (1, 0.0)))


class TestEffectiveSetAndScore:
    def test_strictly_negative_only(self):
        deltas = {"c0": -0.2, "c1": +0.1, "c2": -0.3}
        assert effective_set(deltas) == {"c0", "c2"}

    def test_all_positive_empty(self):
        assert effective_set({"a": 0.5, "b": 0.01}) == set()

    def test_zero_excluded(self):
        assert effective_set({"c0": 0.0}) == set()

    def test_score_sums_negatives(self):
        assert ensemble_performance({"c0": -0.2, "c1": +0.1, "c2": -0.3}) == pytest.approx(-0.5)

    def test_score_zero_when_no_decrease(self):
        assert ensemble_performance({"a": 0.4, "b": 0.0}) == 0.0

    def test_single_negative(self):
        assert ensemble_performance({"c0": -1.0}) == -1.0

    @given(st.dictionaries(st.text(min_size=1, max_size=4), st.floats(-5, 5), min_size=1, max_size=8))
    def test_score_never_positive(self, deltas):
        assert ensemble_performance(deltas) <= 0.0

    @given(st.dictionaries(st.text(min_size=1, max_size=4), st.floats(-5, 5), min_size=1, max_size=8))
    def test_positive_delta_never_changes_score(self, deltas):
        base = ensemble_performance(deltas)
        extended = dict(deltas)
        extended["extra-category"] = 2.5
        assert ensemble_performance(extended) == base

    def test_assessment_bundle(self):
        fa = FilterAssessment.from_deltas({"a": -0.4, "b": 0.2})
        assert fa.effective == frozenset({"a"})
        assert fa.score == pytest.approx(-0.4)


class TestPruneRank:
    def test_effectiveness_and_prune_orders(self):
        scores = {"f0": -0.5, "f1": -0.1, "f2": -0.9}
        assert prune_rank(scores) == ["f2", "f0", "f1"]
        assert prune_order(scores) == ["f1", "f0", "f2"]

    def test_ties_break_by_id(self):
        assert prune_rank({"b": -1.0, "a": -1.0, "c": -1.0}) == ["a", "b", "c"]

    def test_single_filter(self):
        assert prune_rank({"f0": -1.0}) == ["f0"]

    def test_empty_rejected(self):
        with pytest.raises(ContractError):
            prune_rank({})
