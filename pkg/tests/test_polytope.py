"""Tests for the vertex-enumeration polytope oracle."""

import json
import math

import numpy as np
import pytest

from mbal_clo import (
    NormKind,
    Polytope,
    build_grid_polytope,
    build_pricing_polytope,
    distance_to_degeneracy,
    distance_to_degeneracy_many,
    lin_opt_gap,
    solve_lo,
    solve_lo_many,
)

TRIANGLE = Polytope(name="triangle", vertices=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
SEGMENT = Polytope(name="segment", vertices=np.array([[1.0, 0.0], [0.0, 1.0]]))


class TestPolytopeConstruction:
    def test_rejects_empty_vertices(self):
        with pytest.raises(ValueError, match="nonempty"):
            Polytope(name="bad", vertices=np.zeros((0, 3)))

    def test_rejects_duplicate_vertices(self):
        with pytest.raises(ValueError, match="duplicate"):
            Polytope(name="bad", vertices=np.array([[1.0, 0.0], [1.0, 0.0]]))

    def test_rejects_nonfinite_vertices(self):
        with pytest.raises(ValueError, match="finite"):
            Polytope(name="bad", vertices=np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_vertices_are_frozen(self):
        with pytest.raises(ValueError):
            TRIANGLE.vertices[0, 0] = 5.0

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "poly.json"
        TRIANGLE.save(path)
        back = Polytope.load(path)
        assert back.name == TRIANGLE.name
        np.testing.assert_array_equal(back.vertices, TRIANGLE.vertices)

    def test_json_dict_declares_dimension(self):
        doc = TRIANGLE.to_json_dict()
        assert doc["d"] == 2
        assert doc["vertices"] == [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
        doc["d"] = 7
        with pytest.raises(ValueError, match="declared"):
            Polytope.from_json_dict(doc)

    def test_json_document_is_plain_json(self, tmp_path):
        path = tmp_path / "poly.json"
        TRIANGLE.save(path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"name", "d", "vertices"}


class TestSolveLo:
    def test_triangle_interior_cost(self):
        w, idx = solve_lo(TRIANGLE, np.array([1.0, 1.0]))
        np.testing.assert_array_equal(w, [0.0, 0.0])
        assert idx == 0

    def test_zero_cost_breaks_tie_to_lowest_index(self):
        _, idx = solve_lo(TRIANGLE, np.zeros(2))
        assert idx == 0

    def test_grid_all_ones_is_totally_degenerate(self):
        grid = build_grid_polytope(3)
        _, idx = solve_lo(grid, np.ones(grid.dim))
        assert idx == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            solve_lo(TRIANGLE, np.ones(3))

    def test_nonfinite_cost(self):
        with pytest.raises(ValueError, match="finite"):
            solve_lo(TRIANGLE, np.array([np.inf, 0.0]))

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(5)
        costs = rng.normal(size=(64, 2))
        idxs = solve_lo_many(TRIANGLE, costs)
        for c, idx in zip(costs, idxs):
            assert solve_lo(TRIANGLE, c)[1] == idx

    def test_returned_vertex_is_a_copy(self):
        w, _ = solve_lo(TRIANGLE, np.array([1.0, 1.0]))
        w += 10.0
        np.testing.assert_array_equal(TRIANGLE.vertices[0], [0.0, 0.0])


class TestDistanceToDegeneracy:
    def test_triangle_frozen_values(self):
        assert distance_to_degeneracy(TRIANGLE, np.array([1.0, 1.0])) == pytest.approx(1.0)
        assert distance_to_degeneracy(TRIANGLE, np.array([-1.0, 1.0])) == pytest.approx(1.0)

    def test_segment_frozen_value(self):
        # scores 1 vs 2, vertex gap sqrt(2): nu = 1/sqrt(2)
        nu = distance_to_degeneracy(SEGMENT, np.array([1.0, 2.0]))
        assert nu == pytest.approx(0.7071067811865475)

    def test_degenerate_cost_gives_zero(self):
        grid = build_grid_polytope(3)
        assert distance_to_degeneracy(grid, np.ones(grid.dim)) == pytest.approx(0.0)

    def test_single_vertex_is_infinite(self):
        point = Polytope(name="pt", vertices=np.array([[2.0, 3.0]]))
        assert distance_to_degeneracy(point, np.array([1.0, 1.0])) == math.inf

    def test_positive_homogeneity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            c = rng.normal(size=2)
            k = float(rng.uniform(0.1, 10.0))
            assert distance_to_degeneracy(TRIANGLE, k * c) == pytest.approx(
                k * distance_to_degeneracy(TRIANGLE, c)
            )

    def test_one_lipschitz(self):
        rng = np.random.default_rng(11)
        grid = build_grid_polytope(3)
        for _ in range(200):
            c1 = rng.normal(size=grid.dim)
            c2 = c1 + rng.normal(scale=0.3, size=grid.dim)
            gap = abs(
                distance_to_degeneracy(grid, c1) - distance_to_degeneracy(grid, c2)
            )
            assert gap <= np.linalg.norm(c1 - c2) + 1e-12

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(13)
        grid = build_grid_polytope(3)
        costs = rng.normal(size=(64, grid.dim))
        many = distance_to_degeneracy_many(grid, costs)
        for c, nu in zip(costs, many):
            assert distance_to_degeneracy(grid, c) == pytest.approx(nu)

    def test_neighbors_restriction(self):
        # restricting candidates to a far vertex can only raise the minimum
        nu_all = distance_to_degeneracy(TRIANGLE, np.array([1.0, 2.0]))
        nu_far = distance_to_degeneracy(
            TRIANGLE, np.array([1.0, 2.0]), neighbors={0: [2]}
        )
        assert nu_far >= nu_all

    def test_small_perturbations_keep_the_decision(self):
        rng = np.random.default_rng(17)
        grid = build_grid_polytope(3)
        for _ in range(100):
            c = rng.normal(size=grid.dim)
            nu = distance_to_degeneracy(grid, c)
            if nu <= 0:
                continue
            delta = rng.normal(size=grid.dim)
            delta *= 0.99 * nu / np.linalg.norm(delta)
            assert solve_lo(grid, c + delta)[1] == solve_lo(grid, c)[1]

    def test_dual_of_dual_is_primal_for_l2(self):
        x = np.array([3.0, -4.0])
        assert NormKind.L2.dual().dual().of(x) == pytest.approx(NormKind.L2.of(x))


class TestLinOptGap:
    def test_triangle(self):
        assert lin_opt_gap(TRIANGLE, np.array([1.0, 1.0])) == pytest.approx(1.0)

    def test_zero_cost(self):
        assert lin_opt_gap(TRIANGLE, np.zeros(2)) == pytest.approx(0.0)

    def test_grid_all_ones(self):
        grid = build_grid_polytope(3)
        assert lin_opt_gap(grid, np.ones(grid.dim)) == pytest.approx(0.0)

    def test_nonnegative_on_random_costs(self):
        rng = np.random.default_rng(19)
        pricing = build_pricing_polytope()
        for _ in range(100):
            assert lin_opt_gap(pricing, rng.normal(size=pricing.dim)) >= 0.0


class TestLemmaOneOracle:
    """Close predictions (within the larger degeneracy distance) share a decision."""

    @pytest.mark.parametrize(
        "poly",
        [TRIANGLE, build_grid_polytope(3), build_pricing_polytope()],
        ids=["triangle", "grid3", "pricing"],
    )
    def test_identical_decisions_within_margin(self, poly):
        rng = np.random.default_rng(23)
        checked = 0
        while checked < 500:
            c1 = rng.normal(size=poly.dim)
            c2 = c1 + rng.normal(scale=0.05, size=poly.dim)
            bound = max(
                distance_to_degeneracy(poly, c1), distance_to_degeneracy(poly, c2)
            )
            if np.linalg.norm(c1 - c2) >= bound:
                continue
            assert solve_lo(poly, c1)[1] == solve_lo(poly, c2)[1]
            checked += 1
