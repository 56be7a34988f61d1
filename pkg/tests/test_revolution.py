import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from zonotools import convex, sphere
from zonotools.convex import fixtures
from zonotools.convex.revolution import RevolutionBody

E3 = np.array([0.0, 0.0, 1.0])


class TestRevolutionBody:
    def test_validation(self):
        with pytest.raises(ValueError, match="concave"):
            RevolutionBody(rho=np.array([0.0, 0.5, 1.0]), z=np.array([1.0, 0.5, 0.4]))
        with pytest.raises(ValueError, match="non-increasing"):
            RevolutionBody(rho=np.array([0.0, 0.5, 1.0]), z=np.array([1.0, 1.2, 0.0]))
        with pytest.raises(ValueError, match="axis"):
            RevolutionBody(rho=np.array([0.1, 0.5]), z=np.array([1.0, 0.5]))

    def test_from_function_projects_rounding(self):
        # analytically concave profile survives sampling with invariants intact
        body = fixtures.Ball(1.0).body(2049)
        s = np.diff(body.z) / np.diff(body.rho)
        assert np.all(np.diff(s) <= 1e-10)
        assert np.all(s <= 1e-12)

    def test_nodal_latitudes_monotone(self):
        body = fixtures.Lens().body(513)
        t = body.nodal_normal_latitudes()
        assert np.all(np.diff(t) <= 0)
        assert t[0] <= 1.0 and t[-1] >= 0.0


class TestProfileToSupport:
    def test_ball_support_is_constant(self):
        zs = convex.profile_to_support(fixtures.Ball(1.0).body())
        ts = np.linspace(-1, 1, 33)
        assert np.max(np.abs(zs.at(ts) - 1.0)) < 1e-7

    def test_lens_support_piecewise(self):
        lens = fixtures.Lens()
        zs = convex.profile_to_support(lens.body())
        ts = np.linspace(-1, 1, 81)
        assert np.max(np.abs(zs.at(ts) - lens.support(ts))) < 1e-7
        # cap-supported branch above the edge latitude
        assert abs(zs.at(0.8) - (1.0 - 0.4)) < 1e-7
        # edge-supported branch below it
        assert abs(zs.at(0.2) - math.sqrt(3) / 2 * math.sqrt(1 - 0.04)) < 1e-7

    def test_spherocylinder_support_additivity(self):
        sc = fixtures.Spherocylinder(1.0, 0.6)
        zs = convex.profile_to_support(sc.body())
        ts = np.linspace(-1, 1, 41)
        assert np.max(np.abs(zs.at(ts) - (1.0 + 0.3 * np.abs(ts)))) < 1e-7


class TestSurfaceAreaMeasure:
    def test_ball_cap_band(self):
        body = fixtures.Ball(1.0).body(8193)
        zm = convex.surface_area_measure_zonal(body, np.array([-1.0, 0.5, 1.0]))
        # spherical cap above t = 1/2 has area 2 pi (1 - 1/2) = pi
        assert abs(zm.masses[1] - math.pi) < 1e-6

    def test_ball_total_mass(self):
        body = fixtures.Ball(1.0).body(8193)
        zm = convex.surface_area_measure_zonal(body, np.array([-1.0, 0.0, 1.0]))
        assert abs(zm.total_mass() - 4 * math.pi) < 1e-6
        assert zm.atoms == []

    def test_ball_fine_bands(self):
        body = fixtures.Ball(1.0).body(8193)
        edges = np.linspace(-1, 1, 21)
        zm = convex.surface_area_measure_zonal(body, edges)
        assert np.max(np.abs(zm.masses - 2 * math.pi * np.diff(edges))) < 1e-6

    def test_spherocylinder_wall_atom(self):
        sc = fixtures.Spherocylinder(1.0, 0.6)
        zm = convex.surface_area_measure_zonal(sc.body(8193), np.array([-1.0, 0.0, 1.0]))
        atoms = dict(zm.atoms)
        assert abs(atoms[0.0] - 2 * math.pi * 1.0 * 0.6) < 1e-12
        assert abs(zm.total_mass() - (4 * math.pi + 2 * math.pi * 0.6)) < 1e-6

    def test_lens_fan_is_massless(self):
        # the edge circle's normal fan covers |t| < 1/2 with zero area
        body = fixtures.Lens().body(8193)
        zm = convex.surface_area_measure_zonal(body, np.array([-0.45, -0.15, 0.15, 0.45]))
        assert np.max(zm.masses) == 0.0
        assert zm.atoms == []

    def test_flat_top_atom(self):
        # truncated cone with a flat disk on top: atom at t = 1
        body = RevolutionBody(
            rho=np.array([0.0, 0.5, 1.0]), z=np.array([1.0, 1.0, 0.0])
        )
        zm = convex.surface_area_measure_zonal(body, np.array([-1.0, 0.0, 1.0]))
        atoms = dict(zm.atoms)
        assert abs(atoms[1.0] - math.pi * 0.5**2) < 1e-12
        assert abs(atoms[-1.0] - math.pi * 0.5**2) < 1e-12

    def test_csv_dump(self, tmp_path):
        body = fixtures.Spherocylinder(1.0, 0.5).body(513)
        zm = convex.surface_area_measure_zonal(body, np.array([-1.0, 0.0, 1.0]))
        path = tmp_path / "zm.csv"
        zm.to_csv(path)
        text = path.read_text()
        assert text.startswith("t_lo,t_hi,mass\n")
        assert "atom_t,atom_mass" in text


class TestMinkowskiSolve:
    def test_unit_ball_cap_half_gives_lens(self):
        source = fixtures.Ball(1.0).body(8193)
        cap = sphere.Cap(E3, 0.5)
        edges = np.concatenate([[-1.0], np.linspace(-0.9, -0.5, 4), [0.0], np.linspace(0.5, 0.9, 4), [1.0]])
        mu = convex.prescribed_cap_measure(source, cap.height, edges)
        solved = convex.minkowski_solve_revolution(mu, source, cap)
        assert abs(solved.d - math.sqrt(3) / 2) < 1e-4
        assert solved.end_height == 0.0
        lens = fixtures.Lens()
        ts = np.linspace(-1, 1, 61)
        got = convex.profile_to_support(solved).at(ts)
        assert np.max(np.abs(got - lens.support(ts))) < 1e-6

    def test_band_masses_match_prescription(self):
        source = fixtures.Ball(1.0).body(8193)
        cap = sphere.Cap(E3, 0.5)
        edges = np.concatenate([[-1.0], np.linspace(-0.95, -0.5, 7), [0.0], np.linspace(0.5, 0.95, 7), [1.0]])
        mu = convex.prescribed_cap_measure(source, cap.height, edges)
        solved = convex.minkowski_solve_revolution(mu, source, cap)
        got = convex.surface_area_measure_zonal(solved, edges)
        inside = (edges[:-1] >= 0.5) | (edges[1:] <= -0.5)
        scale = np.max(mu.masses[inside])
        assert np.max(np.abs(got.masses[inside] - mu.masses[inside])) < 1e-6 * scale
        outside = got.total_mass() - got.mass_in(0.5, 1.0) - got.mass_in(-1.0, -0.5)
        assert abs(outside) < 1e-8

    def test_scaled_ball(self):
        source = fixtures.Ball(2.0).body(8193)
        cap = sphere.Cap(E3, 0.5)
        edges = np.array([-1.0, -0.7, -0.5, 0.5, 0.7, 1.0])
        mu = convex.prescribed_cap_measure(source, cap.height, edges)
        solved = convex.minkowski_solve_revolution(mu, source, cap)
        lens = fixtures.Lens(r=2.0, c=1.0)
        ts = np.linspace(-1, 1, 61)
        assert np.max(np.abs(convex.profile_to_support(solved).at(ts) - lens.support(ts))) < 1e-6

    def test_cylinder_rejected(self):
        cyl = RevolutionBody(rho=np.array([0.0, 0.5, 1.0]), z=np.array([1.0, 1.0, 1.0]))
        cap = sphere.Cap(E3, 0.5)
        mu = convex.prescribed_cap_measure(cyl, cap.height, np.array([-1.0, 0.0, 1.0]))
        with pytest.raises(ValueError, match="cylinder"):
            convex.minkowski_solve_revolution(mu, cyl, cap)

    def test_off_axis_cap_rejected(self):
        source = fixtures.Ball(1.0).body(513)
        cap = sphere.Cap(np.array([1.0, 0.0, 0.0]), 0.5)
        mu = convex.prescribed_cap_measure(source, cap.height, np.array([-1.0, 0.0, 1.0]))
        with pytest.raises(ValueError, match="axis"):
            convex.minkowski_solve_revolution(mu, source, cap)

    def test_equator_cap_is_unconstructible(self):
        with pytest.raises(ValueError, match="height"):
            sphere.Cap(E3, 0.0)


class TestFixtureGeometry:
    def test_lens_radii_split_on_fan(self):
        lens = fixtures.Lens()
        r1, r2 = lens.radii(np.array([0.2]))
        assert r1[0] == 0.0
        assert abs(r2[0] - lens.d / math.sqrt(1 - 0.04)) < 1e-12

    def test_lens_cap_piece_is_spherical(self):
        lens = fixtures.Lens()
        r1, r2 = lens.radii(np.array([0.7, -0.9]))
        assert np.all(r1 == 1.0) and np.all(r2 == 1.0)
        u = np.array([[0.0, 0.6, 0.8], [0.0, 0.6, -0.8]])
        pts = lens.boundary_points(u)
        # cap points lie on the unit spheres centered at ∓ e3/2
        centers = np.array([[0.0, 0.0, -0.5], [0.0, 0.0, 0.5]])
        assert np.max(np.abs(np.linalg.norm(pts - centers, axis=1) - 1.0)) < 1e-12

    def test_spherocylinder_points_on_two_spheres(self):
        sc = fixtures.Spherocylinder(1.0, 0.6)
        u = np.array([[0.0, 0.6, 0.8], [0.0, 0.6, -0.8]])
        pts = sc.boundary_points(u)
        centers = np.array([[0.0, 0.0, 0.3], [0.0, 0.0, -0.3]])
        assert np.max(np.abs(np.linalg.norm(pts - centers, axis=1) - 1.0)) < 1e-12

    def test_ellipsoid_radii_oracle_sphere(self):
        r = fixtures.ellipsoid_radii_oracle([2.0, 2.0, 2.0], np.array([0.0, 0.0, 1.0]))
        assert_allclose(r, [2.0, 2.0], atol=1e-12)
