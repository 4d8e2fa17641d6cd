import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustmean.errors import ParameterError
from robustmean.multivariate import (
    DirectionSet,
    DirectionalEstimates,
    coordinatewise_mom,
    directional_estimates,
    estimate_multivariate,
    slab_epsilon,
    slab_lower_bound,
    solve_slab_intersection,
)
from robustmean.univariate import EstimatorConfig, estimate_block_huber

CFG = EstimatorConfig(k=10, delta=1.0)


def de_of(vectors, theta):
    return DirectionalEstimates(DirectionSet(np.asarray(vectors, dtype=float)), np.asarray(theta, dtype=float), CFG, 1.0)


def grid_min(de, half=1.0, step=1e-3):
    """Brute-force ``min max_i |<y, v_i> - theta_i|`` over a square lattice."""
    g = np.arange(-half, half + step / 2, step)
    A = de.directions.vectors
    best = math.inf
    for gx in np.array_split(g, 20):
        X, Y = np.meshgrid(gx, g, indexing="ij")
        P = np.stack([X.ravel(), Y.ravel()], axis=1)
        best = min(best, float(np.abs(P @ A.T - de.theta).max(axis=1).min()))
    return best


def three_directions(rng):
    phi = rng.uniform(0, math.pi)
    ang = phi + np.array([0.0, math.pi / 3, 2 * math.pi / 3])
    return np.stack([np.cos(ang), np.sin(ang)], axis=1), rng.uniform(-0.3, 0.3, 3)


class TestDirections:
    def test_normalised_and_frozen(self):
        ds = DirectionSet([[3.0, 4.0]])
        np.testing.assert_allclose(ds.vectors, [[0.6, 0.8]])
        with pytest.raises(ValueError):
            ds.vectors[0, 0] = 1.0

    def test_zero_rejected(self):
        with pytest.raises(ParameterError):
            DirectionSet([[0.0, 0.0]])

    def test_json_roundtrip(self):
        ds = DirectionSet.random_sphere(3, 5, seed=2)
        back = DirectionSet.from_json(ds.to_json())
        np.testing.assert_allclose(ds.vectors, back.vectors, rtol=0, atol=1e-15)

    def test_union_dims(self):
        with pytest.raises(ParameterError):
            DirectionSet.basis(2).union(DirectionSet.basis(3))


class TestDirectionalEstimates:
    def test_constant_rows(self):
        r = np.array([1.5, -2.0, 0.25])
        x = np.tile(r, (40, 1))
        ds = DirectionSet.random_sphere(3, 7, 1)
        de = directional_estimates(x, ds, EstimatorConfig(k=4, delta=1.0))
        np.testing.assert_allclose(de.theta, ds.vectors @ r, atol=1e-9)

    def test_basis_matches_columns(self):
        x = np.random.default_rng(0).standard_t(3, (300, 3))
        cfg = EstimatorConfig(k=15, delta=0.8, seed=5)
        de = directional_estimates(x, DirectionSet.basis(3), cfg)
        cols = [estimate_block_huber(x[:, i], cfg).estimate for i in range(3)]
        np.testing.assert_allclose(de.theta, cols, atol=1e-12)

    def test_negated_direction(self):
        x = np.random.default_rng(1).normal(size=(200, 2))
        v = np.array([[0.6, 0.8], [-0.6, -0.8]])
        de = directional_estimates(x, DirectionSet(v), EstimatorConfig(k=8, delta=0.5))
        assert de.theta[1] == pytest.approx(-de.theta[0], abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            directional_estimates(np.zeros((10, 2)), DirectionSet.basis(3), CFG)


class TestSlabEpsilon:
    def test_box_example(self):
        assert slab_epsilon([0.0, 0.0], de_of(np.eye(2), [1.0, 2.0])) == 2.0

    def test_lower_bound_zero_weight(self):
        assert slab_lower_bound(np.eye(2), np.array([1.0, 2.0]), np.zeros(2)) == 0.0

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_convex(self, seed):
        rng = np.random.default_rng(seed)
        de = de_of(rng.normal(size=(6, 3)), rng.normal(size=6))
        y1, y2, lam = rng.normal(size=3), rng.normal(size=3), rng.uniform()
        mix = slab_epsilon(lam * y1 + (1 - lam) * y2, de)
        assert mix <= lam * slab_epsilon(y1, de) + (1 - lam) * slab_epsilon(y2, de) + 1e-12


class TestSolver:
    def test_basis_box(self):
        sol = solve_slab_intersection(de_of(np.eye(3), [1.0, -2.0, 0.5]))
        assert sol.eps_star <= 1e-12
        np.testing.assert_allclose(sol.mu_hat, [1.0, -2.0, 0.5], atol=1e-12)

    def test_consistent_opposite(self):
        sol = solve_slab_intersection(de_of([[1.0], [-1.0]], [1.0, -1.0]))
        assert sol.eps_star <= 1e-12
        assert sol.mu_hat[0] == pytest.approx(1.0, abs=1e-12)

    def test_inconsistent_opposite(self):
        sol = solve_slab_intersection(de_of([[1.0], [-1.0]], [1.0, 1.0]))
        assert sol.eps_star == pytest.approx(1.0, abs=1e-12)
        assert sol.lower_bound == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("method", ["lp", "subgradient"])
    def test_grid_oracle(self, method):
        tol = 1e-2
        rng = np.random.default_rng(17)
        for _ in range(3):
            A, theta = three_directions(rng)
            de = de_of(A, theta)
            sol = solve_slab_intersection(de, tol=tol if method == "subgradient" else 1e-9, method=method)
            assert abs(sol.eps_star - grid_min(de, step=tol / 10)) <= 2 * tol

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_probe_points_not_better(self, seed):
        rng = np.random.default_rng(seed)
        de = de_of(rng.normal(size=(12, 3)), rng.normal(size=12))
        sol = solve_slab_intersection(de)
        probes = sol.mu_hat + rng.normal(scale=rng.uniform(1e-3, 2), size=(100, 3))
        vals = np.abs(probes @ de.directions.vectors.T - de.theta).max(axis=1)
        assert vals.min() >= sol.eps_star - 1e-9
        assert sol.lower_bound <= sol.eps_star + 1e-12
        assert sol.residual_gap <= 1e-9

    def test_subgradient_agrees_with_lp(self):
        rng = np.random.default_rng(4)
        de = de_of(rng.normal(size=(20, 2)), rng.normal(size=20))
        a = solve_slab_intersection(de)
        b = solve_slab_intersection(de, tol=1e-6, method="subgradient")
        # slow O(1/sqrt(t)) method: close in value, and honest about its gap
        assert a.eps_star - 1e-12 <= b.eps_star <= a.eps_star + 1e-3
        assert b.lower_bound <= a.eps_star + 1e-9
        assert b.converged == (b.residual_gap <= 1e-6)

    def test_bad_method(self):
        with pytest.raises(ParameterError):
            solve_slab_intersection(de_of(np.eye(2), [0, 0]), method="simplex")


class TestEstimateMultivariate:
    def test_d1_matches_univariate(self):
        x = np.random.default_rng(5).standard_t(3, 400)
        cfg = EstimatorConfig(k=20, delta=0.9, seed=2)
        sol = estimate_multivariate(x[:, None], cfg, m_directions=2)
        assert sol.mu_hat[0] == pytest.approx(estimate_block_huber(x, cfg).estimate, abs=1e-9)

    def test_translation(self):
        rng = np.random.default_rng(6)
        x = rng.standard_t(3, (500, 3))
        c = np.array([10.0, -3.0, 0.5])
        cfg = EstimatorConfig(k=20, delta=1.0)
        a, b = estimate_multivariate(x, cfg), estimate_multivariate(x + c, cfg)
        np.testing.assert_allclose(b.mu_hat, a.mu_hat + c, atol=1e-7)
        assert b.eps_star == pytest.approx(a.eps_star, abs=1e-7)

    def test_orthogonal(self):
        rng = np.random.default_rng(7)
        x = rng.standard_t(3, (400, 3))
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        dirs = DirectionSet.random_sphere(3, 40, 3)
        cfg = EstimatorConfig(k=20, delta=1.0)
        a = solve_slab_intersection(directional_estimates(x, dirs, cfg))
        b = solve_slab_intersection(directional_estimates(x @ Q.T, DirectionSet(dirs.vectors @ Q.T), cfg))
        np.testing.assert_allclose(b.mu_hat, Q @ a.mu_hat, atol=1e-7)
        assert b.eps_star == pytest.approx(a.eps_star, abs=1e-7)

    def test_gaussian_rate(self):
        N, d = 5000, 5
        cfg = EstimatorConfig(k=10, delta="auto:confidence:1")
        # the radius is near the 95% point of the sample mean's own error,
        # so a near-mean configuration and a few hundred runs are needed
        hits = 0
        R = 400
        for r in range(R):
            x = np.random.default_rng([55, r]).normal(size=(N, d))
            sol = estimate_multivariate(x, dataclasses.replace(cfg, seed=r))
            hits += np.linalg.norm(sol.mu_hat) <= 1.5 * math.sqrt(d / N)
        assert hits >= 0.95 * R

    def test_contaminated_vs_mean(self):
        rng = np.random.default_rng(8)
        x = np.vstack([rng.standard_t(3, (1000, 2)), np.full((10, 2), 1e6)])
        x = rng.permutation(x)
        sol = estimate_multivariate(x, EstimatorConfig(k=50, delta=1.5))
        assert np.linalg.norm(sol.mu_hat) < 0.5
        assert np.linalg.norm(x.mean(axis=0)) > 1e3

    def test_coordinatewise_mom_shape(self):
        assert coordinatewise_mom(np.zeros((20, 4)), 5).shape == (4,)
