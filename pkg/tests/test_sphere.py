import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from zonotools import sphere

FOUR_PI = 4.0 * math.pi


def sphere_monomial_integral(alpha):
    """Closed-form integral of x^alpha over the unit sphere.

    Vanishes unless all exponents are even; otherwise
    4 pi * prod (a_i - 1)!! / (|a| + 1)!!.
    """
    if any(a % 2 for a in alpha):
        return 0.0
    def dfact(n):
        out = 1
        while n > 1:
            out *= n
            n -= 2
        return out
    num = 1
    for a in alpha:
        num *= dfact(a - 1)
    return FOUR_PI * num / dfact(sum(alpha) + 1)


class TestBuildGrid:
    def test_weights_sum_to_sphere_area(self):
        g = sphere.build_grid(32, 64)
        assert g.n_nodes == 2048
        assert abs(np.sum(g.weights) - FOUR_PI) < 1e-12 * FOUR_PI

    def test_nodes_are_unit(self):
        g = sphere.build_grid(16, 33)
        assert np.max(np.abs(np.linalg.norm(g.nodes, axis=1) - 1.0)) < 1e-14

    def test_rings_share_colatitude_and_weight(self):
        g = sphere.build_grid(8, 17)
        for i, ring in enumerate(g.rings):
            assert_allclose(g.nodes[ring, 2], g.cos_theta[i], atol=1e-15)
            assert np.all(g.weights[ring] == g.ring_weight[i])

    def test_minimal_grid_degree_three_exact(self):
        g = sphere.build_grid(2, 4)
        for alpha in itertools.product(range(4), repeat=3):
            if sum(alpha) > 3:
                continue
            vals = g.nodes[:, 0] ** alpha[0] * g.nodes[:, 1] ** alpha[1] * g.nodes[:, 2] ** alpha[2]
            assert abs(sphere.integrate(g, vals) - sphere_monomial_integral(alpha)) < 1e-13

    @pytest.mark.parametrize("n_theta,n_phi", [(0, 4), (1, 8), (4, 3), (-2, 16)])
    def test_rejects_bad_sizes(self, n_theta, n_phi):
        with pytest.raises(ValueError):
            sphere.build_grid(n_theta, n_phi)


class TestIntegrate:
    def test_constant(self, small_grid):
        assert abs(sphere.integrate(small_grid, np.ones(small_grid.n_nodes)) - FOUR_PI) < 1e-12

    def test_x3_squared(self, small_grid):
        # 1-D oracle: 2 pi * int t^2 dt = 4 pi / 3
        val = sphere.integrate(small_grid, small_grid.nodes[:, 2] ** 2)
        assert abs(val - FOUR_PI / 3.0) < 1e-13

    def test_odd_function_vanishes(self, small_grid):
        assert abs(sphere.integrate(small_grid, small_grid.nodes[:, 2])) < 1e-14

    def test_monomials_degree_six_on_8_17(self):
        g = sphere.build_grid(8, 17)
        for alpha in itertools.product(range(7), repeat=3):
            if sum(alpha) > 6:
                continue
            vals = g.nodes[:, 0] ** alpha[0] * g.nodes[:, 1] ** alpha[1] * g.nodes[:, 2] ** alpha[2]
            exact = sphere_monomial_integral(alpha)
            assert abs(sphere.integrate(g, vals) - exact) <= 1e-12 * max(1.0, abs(exact))

    def test_ring_average_preserves_integral(self, small_grid):
        rng = np.random.default_rng(0)
        vals = rng.normal(size=small_grid.n_nodes)
        ring_avg = small_grid.ring_view(vals).mean(axis=1)
        averaged = np.repeat(ring_avg, small_grid.n_phi)
        a = sphere.integrate(small_grid, vals)
        b = sphere.integrate(small_grid, averaged)
        assert abs(a - b) < 1e-13

    def test_shape_mismatch(self, small_grid):
        with pytest.raises(ValueError):
            sphere.integrate(small_grid, np.ones(7))


class TestTangentBasis:
    def test_canonical_frame_at_pole(self):
        e1, e2 = sphere.tangent_basis(np.array([0.0, 0.0, 1.0]))
        assert_allclose(e1, [1.0, 0.0, 0.0], atol=1e-15)
        assert_allclose(e2, [0.0, 1.0, 0.0], atol=1e-15)

    def test_frame_at_e1(self):
        u = np.array([1.0, 0.0, 0.0])
        e1, e2 = sphere.tangent_basis(u)
        for v, w in [(e1, e2), (e1, u), (e2, u)]:
            assert abs(np.dot(v, w)) < 1e-14
        assert abs(np.linalg.norm(e1) - 1.0) < 1e-14
        assert abs(np.linalg.norm(e2) - 1.0) < 1e-14

    @settings(max_examples=50, deadline=None)
    @given(st.tuples(*[st.floats(-1, 1) for _ in range(3)]))
    def test_gram_matrix_identity(self, raw):
        v = np.asarray(raw)
        if np.linalg.norm(v) < 1e-3:
            return
        u = v / np.linalg.norm(v)
        e1, e2 = sphere.tangent_basis(u)
        frame = np.stack([e1, e2, u])
        assert np.max(np.abs(frame @ frame.T - np.eye(3))) < 1e-14

    def test_batched_matches_single(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(40, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        E1, E2 = sphere.tangent_basis(pts)
        for k in (0, 17, 39):
            e1, e2 = sphere.tangent_basis(pts[k])
            assert_allclose(E1[k], e1, atol=1e-15)
            assert_allclose(E2[k], e2, atol=1e-15)


class TestGreatCircle:
    def test_equatorial_circle(self):
        c = sphere.great_circle(np.array([0.0, 0.0, 1.0]), 128)
        assert np.max(np.abs(c.nodes[:, 2])) == 0.0
        assert abs(sphere.circle_integrate(lambda p: np.ones(len(p)), c) - 2 * math.pi) < 1e-14

    def test_nodes_orthogonal_to_normal(self):
        u = np.array([0.3, -0.4, 0.866025])
        u /= np.linalg.norm(u)
        c = sphere.great_circle(u, 64)
        assert np.max(np.abs(c.nodes @ u)) < 1e-15

    def test_x1_squared_integral(self):
        # 1-D oracle: int cos^2 over the period = pi
        c = sphere.great_circle(np.array([0.0, 0.0, 1.0]), 128)
        val = sphere.circle_integrate(lambda p: p[:, 0] ** 2, c)
        assert abs(val - math.pi) < 1e-13

    def test_vanishing_integrand_on_circle(self):
        c = sphere.great_circle(np.array([0.0, 0.0, 1.0]), 64)
        assert abs(sphere.circle_integrate(lambda p: p[:, 2], c)) < 1e-15

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            sphere.great_circle(np.array([0.0, 0.0, 1.0]), 4)

    def test_non_unit_normal(self):
        with pytest.raises(ValueError):
            sphere.great_circle(np.array([0.0, 0.0, 2.0]), 64)

    def test_samples_only_rejected(self, small_grid):
        from zonotools import transforms

        f = transforms.SphericalFunction(grid=small_grid, values=np.ones(small_grid.n_nodes))
        c = sphere.great_circle(np.array([0.0, 0.0, 1.0]), 16)
        with pytest.raises(ValueError, match="evaluation rule"):
            sphere.circle_integrate(f, c)


class TestCap:
    def test_contains(self):
        cap = sphere.Cap(np.array([0.0, 0.0, 1.0]), 0.5)
        assert cap.contains(np.array([0.0, 0.0, 1.0]))
        assert not cap.contains(np.array([1.0, 0.0, 0.0]))

    def test_height_bounds(self):
        for bad in (0.0, 1.0, -0.3, 1.5):
            with pytest.raises(ValueError):
                sphere.Cap(np.array([0.0, 0.0, 1.0]), bad)

    def test_separation(self):
        u = sphere.Cap(np.array([0.0, 0.0, 1.0]), 0.9)
        v = sphere.Cap(np.array([1.0, 0.0, 0.0]), 0.9)
        expected = math.pi / 2 - 2 * math.acos(0.9)
        assert abs(u.separation(v) - expected) < 1e-12

    def test_sample_inside(self):
        cap = sphere.Cap(np.array([0.0, 1.0, 0.0]), 0.7)
        pts = cap.sample(200, np.random.default_rng(3))
        assert np.all(cap.contains(pts))
        assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1)) < 1e-12


class TestDimensionConstants:
    def test_a3(self):
        assert abs(sphere.DIM3.a_n - 1.0 / (2.0 * math.pi)) < 1e-12

    def test_omega(self):
        assert abs(sphere.DIM3.omega_n - 4.0 * math.pi / 3.0) < 1e-14
        assert abs(sphere.DIM3.omega_n_minus_1 - math.pi) < 1e-14

    def test_a3_matches_quadrature(self, small_grid):
        val = sphere.integrate(small_grid, np.abs(small_grid.nodes[:, 0]))
        # the |x1| integrand is kink-limited on the product grid
        assert abs(1.0 / val - sphere.DIM3.a_n) < 1e-3 * sphere.DIM3.a_n


class TestCsv:
    def test_roundtrip(self, tmp_path, small_grid):
        rng = np.random.default_rng(7)
        vals = rng.normal(size=small_grid.n_nodes)
        path = tmp_path / "dump.csv"
        sphere.grid_to_csv(path, small_grid, vals)
        back = sphere.grid_from_csv(path, small_grid)
        assert np.array_equal(back, vals)

    def test_header_checked(self, tmp_path, small_grid):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n")
        with pytest.raises(ValueError, match="line 1"):
            sphere.grid_from_csv(path, small_grid)

    def test_truncated_file(self, tmp_path, small_grid):
        path = tmp_path / "short.csv"
        th, ph = small_grid.theta[0], small_grid.phi[0]
        path.write_text(f"theta,phi,weight,value\n{th:.17g},{ph:.17g},0.3,0.4\n")
        with pytest.raises(ValueError, match="line 3"):
            sphere.grid_from_csv(path, small_grid)
