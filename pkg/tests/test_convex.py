import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from zonotools import convex, harmonics, sphere, transforms
from zonotools.convex import fixtures

from conftest import random_unit

E3 = np.array([0.0, 0.0, 1.0])


def ellipsoid_support_function(grid, axes=(1.0, 1.0, 2.0), L=48):
    h = fixtures.ellipsoid_support(list(axes))
    return convex.SupportFunction.from_coeffs(grid, harmonics.analyze(grid, h(grid.nodes), L))


class TestRadii:
    def test_ball(self, grid):
        ball = convex.SupportFunction.ball(grid, 2.5)
        rm = convex.radii(ball, E3)
        assert abs(rm.r1 - 2.5) < 1e-12 and abs(rm.r2 - 2.5) < 1e-12
        assert_allclose(rm.Q, 2.5 * np.eye(2), atol=1e-12)

    def test_translate_has_ball_radii(self, grid):
        # linear terms have zero tangential Hessian
        c = harmonics.HarmonicCoeffs.zeros(2)
        c.set(0, 0, math.sqrt(4 * math.pi))
        c.set(1, 0, 0.3 * math.sqrt(4 * math.pi / 3))
        h = convex.SupportFunction.from_coeffs(grid, c)
        for u in (E3, np.array([1.0, 0.0, 0.0]), random_unit(np.random.default_rng(0))):
            rm = convex.radii(h, u)
            assert abs(rm.r1 - 1.0) < 1e-12 and abs(rm.r2 - 1.0) < 1e-12

    def test_ellipsoid_at_pole_against_curvature_oracle(self, grid):
        ell = ellipsoid_support_function(grid)
        rm = convex.radii(ell, E3)
        oracle = fixtures.ellipsoid_radii_oracle([1.0, 1.0, 2.0], E3)
        # pole of (1,1,2): radii a^2/c = 1/2
        assert_allclose(oracle, [0.5, 0.5], atol=1e-14)
        assert abs(rm.r1 - 0.5) < 1e-6 and abs(rm.r2 - 0.5) < 1e-6

    def test_ellipsoid_generic_direction_oracle(self, grid):
        ell = ellipsoid_support_function(grid)
        u = random_unit(np.random.default_rng(1))
        rm = convex.radii(ell, u)
        oracle = fixtures.ellipsoid_radii_oracle([1.0, 1.0, 2.0], u)
        assert_allclose(sorted([rm.r1, rm.r2]), oracle, atol=1e-6)

    def test_grid_route_matches_point_route(self, grid):
        rng = np.random.default_rng(2)
        h = convex.random_support_function(grid, rng)
        _, _, _, r1, r2 = convex.radii_grid(h.coeffs, grid)
        for idx in (3, 801, 4477, 8001):
            rm = convex.radii(h, grid.nodes[idx])
            assert abs(min(rm.r1, rm.r2) - r1[idx]) < 1e-10
            assert abs(max(rm.r1, rm.r2) - r2[idx]) < 1e-10


class TestSupportFunction:
    def test_certificate_values(self, grid):
        ball = convex.SupportFunction.ball(grid, 1.0)
        assert abs(ball.min_radius - 1.0) < 1e-12
        assert abs(ball.max_radius - 1.0) < 1e-12

    def test_nonconvex_rejected(self, grid):
        c = harmonics.HarmonicCoeffs.zeros(4)
        c.set(0, 0, math.sqrt(4 * math.pi))
        c.set(4, 0, 2.0)  # far beyond the convexity margin
        with pytest.raises(ValueError, match="certificate"):
            convex.SupportFunction.from_coeffs(grid, c)

    def test_recentre_moves_steiner_point(self, grid):
        c = harmonics.HarmonicCoeffs.zeros(2)
        c.set(0, 0, math.sqrt(4 * math.pi))
        c.set(1, 0, 1.5 * math.sqrt(4 * math.pi / 3))  # pushes h through zero
        h = convex.SupportFunction.from_coeffs(grid, c)
        assert np.min(h.values) > 0
        assert abs(h.translation[2] - 1.5) < 1e-12

    def test_csv_dump(self, grid, tmp_path):
        ball = convex.SupportFunction.ball(grid, 1.0)
        path = tmp_path / "h.csv"
        ball.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "theta,phi,h"
        assert len(lines) == 1 + grid.n_nodes

    def test_random_corpus_is_strictly_convex(self, grid):
        for seed in range(5):
            h = convex.random_support_function(grid, np.random.default_rng(seed))
            assert h.min_radius > 0.01
            assert np.min(h.values) > 0


class TestAreaDensity:
    def test_ball_densities(self, grid):
        ball = convex.SupportFunction.ball(grid, 1.3)
        assert abs(convex.area_density(ball, E3, 1) - 1.3) < 1e-12
        assert abs(convex.area_density(ball, E3, 2) - 1.3**2) < 1e-12

    def test_first_order_additive(self, grid):
        rng = np.random.default_rng(3)
        hK = convex.random_support_function(grid, rng)
        hL = convex.random_support_function(grid, rng)
        csum = hK.coeffs.copy()
        csum.c = hK.coeffs.c + hL.coeffs.c
        hsum = convex.SupportFunction.from_coeffs(grid, csum)
        total = convex.area_density_grid(hsum, 1)
        parts = convex.area_density_grid(hK, 1) + convex.area_density_grid(hL, 1)
        assert np.max(np.abs(total - parts)) < 1e-10

    def test_hessian_route_matches_laplacian_route(self, grid):
        # pointwise trace of the radii matrix vs the spectral multiplier
        for seed in range(50):
            h = convex.random_support_function(grid, np.random.default_rng(seed), band=8)
            hess = convex.area_density_grid(h, 1)
            spec = convex.area_density_spectral(h)
            assert np.max(np.abs(hess - spec)) < 1e-8

    def test_bad_order(self, grid):
        ball = convex.SupportFunction.ball(grid, 1.0)
        with pytest.raises(ValueError):
            convex.area_density(ball, E3, 3)


class TestNewton:
    def test_ball_equality_everywhere(self, grid):
        rep = convex.newton_report(convex.SupportFunction.ball(grid, 1.0))
        assert np.max(np.abs(rep["gap"])) < 1e-12
        assert rep["equality"].all()

    def test_ellipsoid_strict_at_equator(self, grid):
        ell = ellipsoid_support_function(grid)
        rm = convex.radii(ell, np.array([1.0, 0.0, 0.0]))
        s1 = 0.5 * (rm.r1 + rm.r2)
        s2 = rm.r1 * rm.r2
        assert s1 - math.sqrt(s2) > 0.1

    def test_random_bodies_nonnegative_gap(self, grid):
        for seed in range(10):
            h = convex.random_support_function(grid, np.random.default_rng(100 + seed))
            rep = convex.newton_report(h)
            assert rep["min_gap"] >= -1e-10

    def test_equality_set_matches_umbilic_set(self, grid):
        h = convex.random_support_function(grid, np.random.default_rng(4))
        _, _, _, r1, r2 = convex.radii_grid(h.coeffs, grid)
        rep = convex.newton_report(h, tol=1e-6)
        umbilic = np.abs(r2 - r1) <= 2e-3 * np.maximum(r1, r2)
        # Newton equality at a node forces nearly equal radii there
        assert np.all(umbilic[rep["equality"]])

    def test_orders_checked(self, grid):
        ball = convex.SupportFunction.ball(grid, 1.0)
        with pytest.raises(ValueError):
            convex.newton_report(ball, i=2, j=2)


class TestMixedVolumes:
    def test_mixed_discriminant_diagonal(self, grid):
        h = convex.random_support_function(grid, np.random.default_rng(5))
        u = random_unit(np.random.default_rng(6))
        d = convex.mixed_area_density(h, h, u)
        assert abs(d - convex.area_density(h, u, 2)) < 1e-10

    def test_mixed_with_ball_gives_first_density(self, grid):
        h = convex.random_support_function(grid, np.random.default_rng(7))
        ball = convex.SupportFunction.ball(grid, 1.0)
        u = random_unit(np.random.default_rng(8))
        d = convex.mixed_area_density(h, ball, u)
        assert abs(d - convex.area_density(h, u, 1)) < 1e-10

    def test_symmetry(self, grid):
        hK = convex.random_support_function(grid, np.random.default_rng(9))
        hL = convex.random_support_function(grid, np.random.default_rng(10))
        u = random_unit(np.random.default_rng(11))
        assert abs(
            convex.mixed_area_density(hK, hL, u) - convex.mixed_area_density(hL, hK, u)
        ) < 1e-14

    def test_ball_volume(self, grid):
        ball = convex.SupportFunction.ball(grid, 1.0)
        assert abs(convex.mixed_volume(ball, ball, ball) - 4 * math.pi / 3) < 1e-12

    def test_permutation_invariance(self, grid):
        rng = np.random.default_rng(12)
        h1 = convex.random_support_function(grid, rng)
        h2 = convex.random_support_function(grid, rng)
        h3 = convex.SupportFunction.ball(grid, 1.0)
        vols = [
            convex.mixed_volume(h1, h2, h3),
            convex.mixed_volume(h2, h3, h1),
            convex.mixed_volume(h3, h1, h2),
            convex.mixed_volume(h1, h3, h2),
        ]
        assert max(vols) - min(vols) < 1e-8

    def test_alexandrov_fenchel(self, grid):
        rng = np.random.default_rng(13)
        ball = convex.SupportFunction.ball(grid, 1.0)
        for _ in range(10):
            K = convex.random_support_function(grid, rng, band=6)
            L = convex.random_support_function(grid, rng, band=6)
            vkl = convex.mixed_volume(K, L, ball)
            slack = vkl**2 - convex.mixed_volume(K, K, ball) * convex.mixed_volume(L, L, ball)
            assert slack >= -1e-9 * vkl**2


class TestBoundaryPoint:
    def test_ball(self, grid):
        ball = convex.SupportFunction.ball(grid, 2.0)
        u = random_unit(np.random.default_rng(14))
        assert np.linalg.norm(convex.boundary_point(ball, u) - 2.0 * u) < 1e-12

    def test_translation_shifts_points(self, grid):
        c = harmonics.HarmonicCoeffs.zeros(2)
        c.set(0, 0, math.sqrt(4 * math.pi))
        a = np.array([0.1, -0.2, 0.15])
        norm1 = math.sqrt(4 * math.pi / 3)
        c.set(1, 1, a[0] * norm1)
        c.set(1, -1, a[1] * norm1)
        c.set(1, 0, a[2] * norm1)
        h = convex.SupportFunction.from_coeffs(grid, c)
        u = random_unit(np.random.default_rng(15))
        assert np.linalg.norm(convex.boundary_point(h, u) - (u + a)) < 1e-10

    def test_ellipsoid_point_on_surface(self, grid):
        ell = ellipsoid_support_function(grid)
        u = random_unit(np.random.default_rng(16))
        x = convex.boundary_point(ell, u)
        assert abs(x[0] ** 2 + x[1] ** 2 + (x[2] / 2.0) ** 2 - 1.0) < 1e-10
        assert abs(x @ u - ell.evaluate(u)) < 1e-10

    def test_degenerate_direction_flagged(self, grid):
        # zonal body with a flat point: 1 + a P2(t) has pole radius 1 - 2a,
        # so a = 1/2 degenerates the Gauss-map inverse at the pole
        c = harmonics.HarmonicCoeffs.zeros(4)
        c.set(0, 0, math.sqrt(4 * math.pi))
        c.set(2, 0, 0.5 * math.sqrt(4 * math.pi / 5))
        h = convex.SupportFunction.from_coeffs(grid, c)
        with pytest.raises(ValueError, match="degenerate"):
            convex.boundary_point(h, E3)


class TestUmbilic:
    def test_ball_fits_sphere(self, grid):
        ball = convex.SupportFunction.ball(grid, 1.0)
        rep = convex.umbilic_sphere_check(ball, sphere.Cap(E3, 0.6), tol=1e-8)
        assert rep.is_umbilic
        assert rep.residual < 1e-10
        assert abs(rep.radius - 1.0) < 1e-10

    def test_translated_ball_center_found(self, grid):
        c = harmonics.HarmonicCoeffs.zeros(2)
        c.set(0, 0, math.sqrt(4 * math.pi))
        c.set(1, 0, 0.4 * math.sqrt(4 * math.pi / 3))
        h = convex.SupportFunction.from_coeffs(grid, c)
        rep = convex.umbilic_sphere_check(h, sphere.Cap(E3, 0.7), tol=1e-8)
        assert rep.is_umbilic
        assert np.linalg.norm(rep.center - [0.0, 0.0, 0.4]) < 1e-9

    def test_ellipsoid_not_umbilic(self, grid):
        ell = ellipsoid_support_function(grid)
        rep = convex.umbilic_sphere_check(ell, sphere.Cap(np.array([1.0, 0.0, 0.0]), 0.7), tol=1e-4)
        assert not rep.is_umbilic
        assert rep.residual is None

    def test_empty_cap_rejected(self, grid):
        ball = convex.SupportFunction.ball(grid, 1.0)
        with pytest.raises(ValueError, match="no grid nodes"):
            convex.umbilic_sphere_check(ball, sphere.Cap(E3, 0.999999), tol=1e-6)

    def test_sphere_fit_exact_data(self):
        rng = np.random.default_rng(17)
        center = np.array([0.2, -0.1, 0.3])
        pts = center + 1.7 * random_unit(rng, 60)
        c, r, resid = convex.fit_sphere(pts)
        assert np.linalg.norm(c - center) < 1e-12
        assert abs(r - 1.7) < 1e-12
        assert resid < 1e-12


class TestSymmetrizeSupport:
    def test_ball_unchanged(self, grid):
        ball = convex.SupportFunction.ball(grid, 1.0)
        out = convex.radial_symmetrize_support(ball)
        assert np.max(np.abs(out.values - ball.values)) < 1e-13

    def test_ellipsoid_stays_convex(self, grid):
        h = fixtures.ellipsoid_support([1.0, 2.0, 3.0])
        ell = convex.SupportFunction.from_coeffs(grid, harmonics.analyze(grid, h(grid.nodes), 48))
        out = convex.radial_symmetrize_support(ell)
        assert out.min_radius > 0
        # output is zonal
        V = grid.ring_view(out.values)
        assert np.max(np.abs(V - V[:, :1])) < 1e-10

    def test_first_density_commutes_with_symmetrization(self, grid):
        rng = np.random.default_rng(18)
        h = convex.random_support_function(grid, rng)
        mk = convex.radial_symmetrize_support(h)
        f1_of_sym = convex.area_density_grid(mk, 1)
        f1_sym = transforms.radial_symmetrize(
            transforms.SphericalFunction(grid=grid, values=convex.area_density_grid(h, 1))
        ).values
        assert np.max(np.abs(f1_of_sym - f1_sym)) < 1e-6

    def test_sum_of_umbilic_bodies_is_umbilic(self, grid):
        # Hessian additivity: scaled sums preserve equal radii on a cap
        cap = sphere.Cap(E3, 0.8)
        mask = grid.cap_mask(cap)
        b1 = convex.SupportFunction.ball(grid, 1.0)
        b2 = convex.SupportFunction.ball(grid, 2.0)
        for lam in (0.5, 1.0, 2.0):
            c = b1.coeffs.copy()
            c2 = b2.coeffs.truncated(c.L)
            c.c = lam * (c.c + c2.c)
            h = convex.SupportFunction.from_coeffs(grid, c)
            _, _, _, r1, r2 = convex.radii_grid(h.coeffs, grid)
            assert np.max(np.abs(r2[mask] - r1[mask])) < 1e-10
