"""Tests for the synthetic shortest-path and pricing worlds."""

import math

import numpy as np
import pytest

from mbal_clo import (
    PRICING_BASE_COEFS,
    PRICING_CENTERS,
    PRICING_PRICE_COEFS,
    PRICING_PRICES,
    PricingScenario,
    ShortestPathScenario,
    TrueModel,
    build_grid_polytope,
    build_pricing_polytope,
    distance_to_degeneracy,
    gen_pricing_scenario,
    gen_shortest_path_scenario,
    load_scenario,
    sample_degeneracy_profile_cost,
    save_scenario,
    solve_lo,
    with_eps_bar,
)
from mbal_clo.polytope import distance_to_degeneracy_many, solve_lo_many


class TestGridPolytope:
    @pytest.mark.parametrize("k,count", [(2, 2), (3, 6), (5, 70)])
    def test_path_counts(self, k, count):
        assert build_grid_polytope(k).num_vertices == count

    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_dimension(self, k):
        assert build_grid_polytope(k).dim == 2 * k * (k - 1)

    @pytest.mark.parametrize("k", [3, 5])
    def test_vertices_are_path_incidences(self, k):
        poly = build_grid_polytope(k)
        assert set(np.unique(poly.vertices)) == {0.0, 1.0}
        np.testing.assert_array_equal(
            poly.vertices.sum(axis=1), np.full(poly.num_vertices, 2 * (k - 1))
        )

    def test_each_path_uses_distinct_edges(self):
        poly = build_grid_polytope(3)
        assert np.unique(poly.vertices, axis=0).shape[0] == poly.num_vertices

    def test_too_small_grid(self):
        with pytest.raises(ValueError, match=">= 2"):
            build_grid_polytope(1)


@pytest.fixture(scope="module")
def scn():
    return gen_shortest_path_scenario(42)


class TestShortestPathScenario:
    def test_generated_dimensions(self, scn):
        assert scn.d == 12
        assert scn.coef_matrix.shape == (12, 5)
        assert scn.centers.shape == (6, 5)

    def test_coef_matrix_is_binary(self, scn):
        assert set(np.unique(scn.coef_matrix)) <= {0.0, 1.0}

    def test_each_center_makes_its_target_path_optimal(self, scn):
        poly = scn.polytope()
        means = scn.conditional_mean_many(scn.centers)
        idx = solve_lo_many(poly, means)
        np.testing.assert_array_equal(idx, scn.target_paths)

    def test_each_center_clears_the_degeneracy_floor(self, scn):
        poly = scn.polytope()
        means = scn.conditional_mean_many(scn.centers)
        nus = distance_to_degeneracy_many(poly, means)
        floors = 0.1 * np.linalg.norm(means, axis=1)
        assert np.all(nus >= floors)

    def test_conditional_mean_formula(self, scn):
        x = np.arange(5, dtype=float) / 10.0
        lin = scn.coef_matrix @ x / math.sqrt(5)
        np.testing.assert_allclose(scn.conditional_mean(x), 1.0 + (1.0 + lin) ** scn.deg)

    def test_conditional_mean_is_deterministic(self, scn):
        x = np.ones(5)
        np.testing.assert_array_equal(scn.conditional_mean(x), scn.conditional_mean(x))

    def test_label_noise_is_bounded_multiplicative(self, scn):
        rng = np.random.default_rng(1)
        x = scn.sample_x(rng)
        mean = scn.conditional_mean(x)
        for _ in range(50):
            ratio = scn.sample_label(x, rng) / mean
            assert np.all(ratio >= 1 - scn.eps_bar - 1e-12)
            assert np.all(ratio <= 1 + scn.eps_bar + 1e-12)

    def test_sample_x_many_matches_mixture_shape(self, scn):
        rng = np.random.default_rng(2)
        X = scn.sample_x_many(rng, 128)
        assert X.shape == (128, 5)

    def test_zero_variance_collapses_to_centers(self, scn):
        from dataclasses import replace

        frozen = replace(scn, sigma_m2=0.0)
        rng = np.random.default_rng(3)
        X = frozen.sample_x_many(rng, 64)
        dists = np.linalg.norm(X[:, None, :] - frozen.centers[None, :, :], axis=2)
        assert np.all(dists.min(axis=1) < 1e-12)

    def test_json_round_trip(self, scn, tmp_path):
        path = tmp_path / "scn.json"
        save_scenario(scn, path)
        back = load_scenario(path)
        assert isinstance(back, ShortestPathScenario)
        np.testing.assert_array_equal(back.coef_matrix, scn.coef_matrix)
        np.testing.assert_array_equal(back.centers, scn.centers)
        assert back.target_paths == scn.target_paths
        assert back.eps_bar == scn.eps_bar

    def test_with_eps_bar(self, scn):
        quiet = with_eps_bar(scn, 0.0)
        rng = np.random.default_rng(4)
        x = quiet.sample_x(rng)
        np.testing.assert_allclose(quiet.sample_label(x, rng), quiet.conditional_mean(x))

    def test_generation_is_reproducible(self, scn):
        again = gen_shortest_path_scenario(42)
        np.testing.assert_array_equal(again.coef_matrix, scn.coef_matrix)
        np.testing.assert_array_equal(again.centers, scn.centers)

    def test_impossible_threshold_raises_with_diagnostics(self):
        with pytest.raises(RuntimeError, match="no coefficient matrix"):
            gen_shortest_path_scenario(
                0, degeneracy_threshold=1e9, max_coef_resamples=2, max_center_candidates=50
            )

    def test_validation(self):
        with pytest.raises(ValueError, match="eps_bar"):
            gen_shortest_path_scenario(42, eps_bar=1.5)


class TestPricingPolytope:
    def test_ten_monotone_menus(self):
        poly = build_pricing_polytope()
        assert poly.num_vertices == 10
        assert poly.dim == 9

    def test_brute_force_enumeration_matches(self):
        # independent check: one-hot per item, price levels non-decreasing
        poly = build_pricing_polytope()
        found = set()
        for v in poly.vertices:
            picks = tuple(int(np.argmax(v[3 * item : 3 * item + 3])) for item in range(3))
            assert v.sum() == 3.0
            assert picks[0] <= picks[1] <= picks[2]
            found.add(picks)
        expected = {
            (i0, i1, i2)
            for i0 in range(3)
            for i1 in range(3)
            for i2 in range(3)
            if i0 <= i1 <= i2
        }
        assert found == expected


class TestPricingScenario:
    def test_appendix_constants(self):
        assert PRICING_PRICES == (60.0, 80.0, 90.0)
        assert PRICING_PRICE_COEFS == (-0.0202733, -0.0133531, -0.00540672)
        assert PRICING_BASE_COEFS == (-1.19155, -1.45748, -1.22819)

    def test_seven_centers_with_six_features(self):
        assert np.asarray(PRICING_CENTERS).shape == (7, 6)

    def test_conditional_mean_is_negative_revenue(self):
        scn = gen_pricing_scenario(0)
        x = scn.centers[0]
        mean = scn.conditional_mean(x)
        # first entry: item 1 at price 60 with the baseline coefficients
        expected = -60.0 * math.exp(PRICING_BASE_COEFS[0] + PRICING_PRICE_COEFS[0] * 60.0)
        assert mean[0] == pytest.approx(expected)
        assert mean[0] == pytest.approx(-5.399987086735548)
        assert np.all(mean < 0)

    def test_label_noise_per_entry(self):
        scn = gen_pricing_scenario(0)
        rng = np.random.default_rng(5)
        x = scn.sample_x(rng)
        ratio = scn.sample_label(x, rng) / scn.conditional_mean(x)
        assert np.all((ratio >= 0.9 - 1e-12) & (ratio <= 1.1 + 1e-12))

    def test_shared_item_noise_ties_entries(self):
        scn = gen_pricing_scenario(0, shared_item_noise=True)
        rng = np.random.default_rng(6)
        x = scn.sample_x(rng)
        ratio = scn.sample_label(x, rng) / scn.conditional_mean(x)
        for item in range(3):
            block = ratio[3 * item : 3 * item + 3]
            np.testing.assert_allclose(block, block[0])

    def test_json_round_trip(self, tmp_path):
        scn = gen_pricing_scenario(9, eps_bar=0.2, shared_item_noise=True)
        path = tmp_path / "pricing.json"
        save_scenario(scn, path)
        back = load_scenario(path)
        assert back == scn

    def test_true_model_wraps_conditional_mean(self):
        scn = gen_pricing_scenario(0)
        model = TrueModel(scn)
        x = scn.centers[1]
        np.testing.assert_array_equal(model.predict(x), scn.conditional_mean(x))
        np.testing.assert_array_equal(model(x), scn.conditional_mean(x))


class TestDegeneracyProfileSampler:
    def test_kappa_one_is_uniform_ball(self):
        poly = build_grid_polytope(2)
        rng = np.random.default_rng(7)
        U = sample_degeneracy_profile_cost(poly, 1.0, 500, rng)
        assert np.all(np.linalg.norm(U, axis=1) <= 1.0 + 1e-12)

    def test_invalid_kappa(self):
        poly = build_grid_polytope(2)
        with pytest.raises(ValueError, match="kappa"):
            sample_degeneracy_profile_cost(poly, 0.0, 10, np.random.default_rng(0))

    def test_transform_reshapes_the_degeneracy_profile(self):
        # kappa=2 should thin the mass near degeneracy relative to kappa=1
        poly = build_grid_polytope(2)
        rng = np.random.default_rng(8)
        b = 0.05
        near_1 = np.mean(
            distance_to_degeneracy_many(
                poly, sample_degeneracy_profile_cost(poly, 1.0, 4000, rng)
            )
            < b
        )
        near_2 = np.mean(
            distance_to_degeneracy_many(
                poly, sample_degeneracy_profile_cost(poly, 2.0, 4000, rng)
            )
            < b
        )
        assert near_2 < near_1
