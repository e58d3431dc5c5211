import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archsearch.errors import ContractViolation
from archsearch.operators import (
    crowded_tournament,
    crowding_distance,
    dominates_matrix,
    environmental_selection,
    fast_nondominated_ranks,
    nondominated_filter,
    nondominated_mask,
    polynomial_mutation,
    polynomial_mutation_batch,
    rank_and_crowding,
    sbx_crossover,
    sbx_crossover_pairs,
)


def brute_force_front(points):
    """O(n^2) dominance filter used as the oracle."""
    keep = []
    for i, p in enumerate(points):
        dominated = any(
            np.all(q <= p) and np.any(q < p)
            for j, q in enumerate(points) if j != i
        )
        if not dominated:
            keep.append(tuple(p))
    return set(keep)


class TestSbx:
    def test_rate_zero_returns_parents(self, rng):
        a, b = rng.random(10), rng.random(10)
        c1, c2 = sbx_crossover(a, b, rate=0.0, di=10.0, rng=rng)
        np.testing.assert_array_equal(c1, a)
        np.testing.assert_array_equal(c2, b)

    def test_identical_parents_unchanged(self, rng):
        a = rng.random(10)
        c1, c2 = sbx_crossover(a, a.copy(), rate=1.0, di=10.0, rng=rng)
        np.testing.assert_array_equal(c1, a)
        np.testing.assert_array_equal(c2, a)

    def test_children_stay_in_bounds(self, rng):
        for _ in range(50):
            a, b = rng.random(20), rng.random(20)
            c1, c2 = sbx_crossover(a, b, rate=1.0, di=2.0, rng=rng)
            for c in (c1, c2):
                assert (c >= 0.0).all() and (c <= 1.0).all()

    def test_no_systematic_drift(self):
        # SBX is (near-)symmetric around the parent midpoint; over many
        # trials the offspring mean must sit on it.
        rng = np.random.default_rng(7)
        a = np.full((20000, 1), 0.2)
        b = np.full((20000, 1), 0.7)
        c1, c2 = sbx_crossover_pairs(a, b, rate=1.0, di=10.0, rng=rng)
        mean = np.concatenate([c1, c2]).mean()
        assert mean == pytest.approx(0.45, abs=0.02)

    def test_deterministic_under_seed(self):
        a = np.linspace(0, 1, 12)
        b = np.linspace(1, 0, 12)
        r1 = sbx_crossover(a, b, 0.9, 10.0, np.random.default_rng(3))
        r2 = sbx_crossover(a, b, 0.9, 10.0, np.random.default_rng(3))
        np.testing.assert_array_equal(r1[0], r2[0])
        np.testing.assert_array_equal(r1[1], r2[1])

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ContractViolation):
            sbx_crossover(np.zeros(3), np.zeros(4), 1.0, 10.0, rng)


class TestPolynomialMutation:
    def test_rate_zero_is_identity(self, rng):
        g = rng.random(15)
        np.testing.assert_array_equal(polynomial_mutation(g, 0.0, 10.0, rng), g)

    def test_stays_in_bounds(self, rng):
        for _ in range(50):
            g = rng.random(20)
            m = polynomial_mutation(g, 1.0, 5.0, rng)
            assert (m >= 0.0).all() and (m <= 1.0).all()

    def test_interior_point_has_symmetric_displacement(self):
        rng = np.random.default_rng(11)
        g = np.full((40000, 1), 0.5)
        m = polynomial_mutation_batch(g, 1.0, 10.0, rng)
        assert (m - g).mean() == pytest.approx(0.0, abs=0.01)

    def test_boundary_gene_only_moves_inward(self):
        rng = np.random.default_rng(13)
        zeros = np.zeros((1000, 1))
        ones = np.ones((1000, 1))
        m0 = polynomial_mutation_batch(zeros, 1.0, 10.0, rng)
        m1 = polynomial_mutation_batch(ones, 1.0, 10.0, rng)
        assert (m0 >= 0.0).all() and (m0 > 0.0).any()
        assert (m1 <= 1.0).all() and (m1 < 1.0).any()


class TestNondominatedFilter:
    def test_simple_front(self):
        pts = np.array([[0.0, 2.0], [1.0, 1.0], [2.0, 0.0], [2.0, 2.0]])
        out = nondominated_filter(pts)
        assert {tuple(p) for p in out} == {(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)}

    def test_duplicates_collapse_to_one(self):
        pts = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])
        out = nondominated_filter(pts)
        assert out.shape == (1, 2)

    def test_input_order_preserved(self):
        pts = np.array([[2.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
        out = nondominated_filter(pts)
        np.testing.assert_array_equal(out, pts)

    def test_single_point(self):
        out = nondominated_filter(np.array([[3.0, 4.0]]))
        assert out.shape == (1, 2)

    def test_empty_input(self):
        assert nondominated_filter(np.zeros((0, 4))).shape == (0, 4)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 8))
    def test_matches_brute_force_oracle(self, seed, d):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 61))
        # a small integer grid forces duplicates and plenty of dominance
        pts = rng.integers(0, 4, size=(n, d)).astype(np.float64)
        got = {tuple(p) for p in nondominated_filter(pts)}
        assert got == brute_force_front(pts)

    def test_mask_keeps_all_duplicates(self):
        pts = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 3.0]])
        assert nondominated_mask(pts).tolist() == [True, True, True]

    def test_large_set_is_fast(self, rng):
        pts = rng.random((5000, 8))
        out = nondominated_filter(pts)
        assert len(out) >= 1
        got = {tuple(p) for p in out}
        sample = pts[rng.integers(0, len(pts), 200)]
        for p in sample:
            dominated = ((pts <= p).all(1) & (pts < p).any(1)).any()
            assert (tuple(p) in got) == (not dominated)


class TestRanking:
    def test_ranks_match_iterated_filter(self, rng):
        for _ in range(20):
            pts = rng.integers(0, 5, size=(40, 3)).astype(np.float64)
            ranks = fast_nondominated_ranks(pts)
            # oracle: peel fronts with the brute-force filter
            remaining = list(range(40))
            level = 0
            while remaining:
                sub = pts[remaining]
                front = brute_force_front(sub)
                peeled = [i for i in remaining if tuple(pts[i]) in front]
                for i in peeled:
                    assert ranks[i] == level
                remaining = [i for i in remaining if i not in peeled]
                level += 1

    def test_dominates_matrix_irreflexive(self, rng):
        pts = rng.random((30, 4))
        dom = dominates_matrix(pts)
        assert not dom.diagonal().any()


class TestCrowding:
    def test_four_point_front(self):
        pts = np.array([[0.0, 3.0], [1.0, 2.0], [2.0, 1.0], [3.0, 0.0]])
        d = crowding_distance(pts)
        assert d[0] == np.inf and d[3] == np.inf
        assert d[1] == pytest.approx(4.0 / 3.0)
        assert d[2] == pytest.approx(4.0 / 3.0)

    def test_two_points_are_boundaries(self):
        d = crowding_distance(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert (d == np.inf).all()

    def test_degenerate_axis_ignored(self):
        pts = np.array([[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]])
        d = crowding_distance(pts)
        assert np.isfinite(d[1])


class TestSelection:
    def test_environmental_selection_prefers_lower_ranks(self, rng):
        # one clearly dominated point must be dropped first
        pts = np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [5.0, 5.0]])
        survivors = environmental_selection(pts, 3)
        assert set(survivors.tolist()) == {0, 1, 2}

    def test_capacity_larger_than_population(self, rng):
        pts = rng.random((5, 3))
        survivors = environmental_selection(pts, 10)
        assert len(survivors) == 5

    def test_tournament_respects_rank(self):
        rng = np.random.default_rng(5)
        ranks = np.array([0, 5])
        crowd = np.array([1.0, 1.0])
        winners = crowded_tournament(ranks, crowd, 4000, rng)
        frac_worse = (winners == 1).mean()
        # index 1 can only win when drawn against itself (p = 0.25)
        assert frac_worse == pytest.approx(0.25, abs=0.05)

    def test_tournament_breaks_rank_ties_by_crowding(self):
        rng = np.random.default_rng(6)
        ranks = np.array([0, 0])
        crowd = np.array([0.0, 9.0])
        winners = crowded_tournament(ranks, crowd, 4000, rng)
        assert (winners == 1).mean() == pytest.approx(0.75, abs=0.05)

    def test_rank_and_crowding_shapes(self, rng):
        pts = rng.random((25, 8))
        ranks, crowd = rank_and_crowding(pts)
        assert ranks.shape == crowd.shape == (25,)
        assert (ranks >= 0).all()
