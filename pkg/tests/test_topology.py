import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bettikit.errors import ContractError, ResourceError
from bettikit.matrix import SymmetricMatrix, edge_order
from bettikit.topology import (
    betti_curves,
    betti_curves_of,
    feature_topology,
    flag_filtration,
    max_betti,
    starting_edge_density,
)

from oracle import oracle_betti_curves


def sym_from_pairs(n, weights):
    m = np.zeros((n, n))
    for (i, j), w in weights.items():
        m[i, j] = m[j, i] = w
    return SymmetricMatrix(m)


def four_cycle_matrix():
    # top-4 edges form the square 0-1-2-3, the chords arrive 5th and 6th
    return sym_from_pairs(4, {(0, 1): 10, (1, 2): 9, (2, 3): 8, (0, 3): 7, (0, 2): 6, (1, 3): 5})


def random_symmetric_values(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.random((n, n))
    return SymmetricMatrix(m + m.T)


class TestFlagFiltration:
    def test_triangle_born_with_last_edge(self):
        sf = flag_filtration(edge_order(sym_from_pairs(3, {(0, 1): 9, (0, 2): 7, (1, 2): 5})), max_dim=2)
        assert sf.counts() == [3, 3, 1]
        assert sf.births[0].tolist() == [0, 0, 0]
        assert sf.births[1].tolist() == [1, 2, 3]
        assert sf.births[2].tolist() == [3]

    def test_k4_has_four_triangles(self):
        sf = flag_filtration(edge_order(four_cycle_matrix()), max_dim=2)
        assert sf.counts() == [4, 6, 4]
        assert sf.births[2].tolist() == [5, 5, 6, 6]

    def test_two_vertices_no_triangles(self):
        sf = flag_filtration(edge_order(random_symmetric_values(2, 0)), max_dim=2)
        assert sf.counts() == [2, 1, 0]

    @given(st.integers(2, 7), st.integers(0, 10), st.integers(1, 4))
    @settings(max_examples=30, deadline=None)
    def test_complete_counts_match_binomials(self, n, seed, max_dim):
        from math import comb

        sf = flag_filtration(edge_order(random_symmetric_values(n, seed)), max_dim=max_dim)
        assert sf.counts() == [comb(n, d + 1) for d in range(max_dim + 1)]

    def test_flag_rule_birth_is_latest_edge(self):
        ef = edge_order(four_cycle_matrix())
        sf = flag_filtration(ef, max_dim=3)
        pos = {tuple(e): p + 1 for p, e in enumerate(ef.edges.tolist())}
        for d in (2, 3):
            for verts, birth in zip(sf.simplices[d].tolist(), sf.births[d].tolist()):
                edge_births = [pos[(a, b)] for ai, a in enumerate(verts) for b in verts[ai + 1 :]]
                assert birth == max(edge_births)

    def test_budget_error_reports_requirement(self):
        ef = edge_order(random_symmetric_values(12, 1))
        with pytest.raises(ResourceError, match="requires budget >= 298"):
            flag_filtration(ef, max_dim=2, budget=100)

    def test_max_dim_zero_rejected(self):
        with pytest.raises(ContractError):
            flag_filtration(edge_order(random_symmetric_values(3, 0)), max_dim=0)


class TestBettiCurves:
    def test_four_cycle_beta1(self):
        # frozen expectation cross-checked against the brute-force oracle
        sym = four_cycle_matrix()
        want = oracle_betti_curves(sym.values, k_max=1)
        assert want[1].tolist() == [0, 0, 0, 0, 1, 0, 0]
        bc = betti_curves_of(sym, k_max=1)
        assert np.array_equal(bc.curves, want)

    def test_any_n3_matrix_has_flat_beta1(self):
        for seed in range(5):
            bc = betti_curves_of(random_symmetric_values(3, seed), k_max=1)
            assert np.all(bc.curves[1] == 0)

    def test_beta0_endpoints(self):
        for n, seed in [(2, 0), (5, 1), (8, 2)]:
            bc = betti_curves_of(random_symmetric_values(n, seed), k_max=1)
            assert bc.curves[0, 0] == n
            assert bc.curves[0, -1] == 1

    def test_k_max_beyond_expansion_rejected(self):
        sf = flag_filtration(edge_order(random_symmetric_values(4, 0)), max_dim=1)
        with pytest.raises(ContractError):
            betti_curves(sf, k_max=1)

    @given(st.integers(2, 6), st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_matches_oracle(self, n, seed):
        sym = random_symmetric_values(n, seed)
        got = betti_curves_of(sym, k_max=1).curves
        want = oracle_betti_curves(sym.values, k_max=1)
        assert np.array_equal(got, want)

    @given(st.integers(3, 6), st.integers(0, 1000))
    @settings(max_examples=15, deadline=None)
    def test_matches_oracle_k2(self, n, seed):
        # the homology bound is configurable upward; cross-check one level up
        sym = random_symmetric_values(n, seed)
        got = betti_curves_of(sym, k_max=2).curves
        want = oracle_betti_curves(sym.values, k_max=2)
        assert np.array_equal(got, want)

    def test_matches_oracle_larger_sides(self):
        for n in (10, 12):
            sym = random_symmetric_values(n, seed=n)
            got = betti_curves_of(sym, k_max=1).curves
            want = oracle_betti_curves(sym.values, k_max=1)
            assert np.array_equal(got, want)

    def test_k_zero_pipeline(self):
        sym = random_symmetric_values(6, 9)
        bc = betti_curves_of(sym, k_max=0)
        assert bc.k_max == 0
        assert np.array_equal(bc.curves[0], oracle_betti_curves(sym.values, k_max=0)[0])

    @given(st.integers(2, 5), st.integers(0, 1000))
    @settings(max_examples=20, deadline=None)
    def test_euler_consistency(self, n, seed):
        # with max_dim = n - 1 every clique is retained, so the alternating
        # simplex count equals the alternating Betti sum at every step
        sym = random_symmetric_values(n, seed)
        sf = flag_filtration(edge_order(sym), max_dim=n - 1)
        bc = betti_curves(sf, k_max=max(n - 2, 0))
        for v in range(sf.n_edges + 1):
            simplex_side = sum(
                (-1) ** d * int(np.count_nonzero(sf.births[d] <= v)) for d in range(sf.max_dim + 1)
            )
            betti_side = sum((-1) ** k * int(bc.curves[k, v]) for k in range(bc.k_max + 1))
            assert simplex_side == betti_side

    def test_order_invariance_shift_scale_exp(self):
        for seed in range(8):
            sym = random_symmetric_values(6, seed)
            base = betti_curves_of(sym, k_max=1)
            for transform in (lambda x: 3.0 * x + 11.0, np.exp):
                other = betti_curves_of(SymmetricMatrix(transform(sym.values)), k_max=1)
                assert np.array_equal(base.curves, other.curves)


class TestCurveSummaries:
    def test_four_cycle_sed(self):
        bc = betti_curves_of(four_cycle_matrix(), k_max=1)
        assert starting_edge_density(bc, 1) == 4

    def test_sed_invariant_under_affine_map(self):
        sym = four_cycle_matrix()
        mapped = SymmetricMatrix(2.0 * sym.values + 7.0)
        assert starting_edge_density(betti_curves_of(mapped, k_max=1), 1) == 4

    def test_sed_none_when_flat(self):
        bc = betti_curves_of(random_symmetric_values(3, 4), k_max=1)
        assert starting_edge_density(bc, 1) is None

    def test_sed_is_first_nonzero(self):
        for seed in range(10):
            bc = betti_curves_of(random_symmetric_values(7, seed), k_max=1)
            sed = starting_edge_density(bc, 1)
            if sed is None:
                assert np.all(bc.curves[1] == 0)
            else:
                assert bc.curves[1, sed] >= 1
                assert np.all(bc.curves[1, :sed] == 0)

    def test_max_betti_examples(self):
        bc = betti_curves_of(four_cycle_matrix(), k_max=1)
        assert max_betti(bc, 1) == 1
        assert max_betti(bc, 0) == 4
        bc3 = betti_curves_of(random_symmetric_values(3, 0), k_max=1)
        assert max_betti(bc3, 1) == 0

    def test_k_out_of_range(self):
        bc = betti_curves_of(four_cycle_matrix(), k_max=1)
        with pytest.raises(ContractError):
            starting_edge_density(bc, 2)
        with pytest.raises(ContractError):
            max_betti(bc, -1)


class TestFeatureTopology:
    def test_empty_and_full_prefix(self):
        ef = edge_order(four_cycle_matrix())
        assert feature_topology(ef, 0).edges.shape == (0, 2)
        assert np.array_equal(feature_topology(ef, 6).edges, ef.edges)

    def test_small_prefix(self):
        ef = edge_order(sym_from_pairs(3, {(0, 1): 9, (0, 2): 7, (1, 2): 5}))
        assert [tuple(e) for e in feature_topology(ef, 2).edges] == [(0, 1), (0, 2)]

    def test_out_of_range(self):
        ef = edge_order(four_cycle_matrix())
        with pytest.raises(ContractError):
            feature_topology(ef, 7)
        with pytest.raises(ContractError):
            feature_topology(ef, -1)

    @given(st.integers(2, 6), st.integers(0, 100))
    @settings(max_examples=20, deadline=None)
    def test_nesting(self, n, seed):
        ef = edge_order(random_symmetric_values(n, seed))
        previous = set()
        for v in range(len(ef) + 1):
            current = {tuple(e) for e in feature_topology(ef, v).edges}
            assert previous <= current
            assert len(current) == v
            previous = current
