"""Quadrature grids on the unit sphere, great circles and tangent frames.

The grid is a tensor product of Gauss-Legendre nodes in cos(theta) and
uniformly spaced longitudes, so every latitude ring carries nodes of equal
weight.  That ring structure is what the radial symmetrization operator
relies on, and the product rule integrates all spherical polynomials of
degree <= min(2*n_theta - 1, n_phi - 1) exactly.

All angles are in radians; surface measures are those induced by the
2-dimensional Hausdorff measure on the unit sphere (total mass 4*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FOUR_PI = 4.0 * math.pi

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def unit_ball_volume(k):
    """Volume of the unit ball in R^k."""
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


@dataclass(frozen=True)
class DimensionConstants:
    """Dimension-dependent normalization constants, fixed at n = 3.

    a_n is the reciprocal of the sphere integral of |x_1| (so a constant
    density a_n generates the unit ball as a zonoid); b_n is the factor
    relating the first area-measure density of a zonoid to the Funk
    transform of its generating density.  b_3 = 1 is asserted by a
    calibration test in the zonoid module rather than assumed.
    """

    n: int = 3
    omega_n: float = unit_ball_volume(3)
    omega_n_minus_1: float = unit_ball_volume(2)
    a_n: float = 1.0 / (2.0 * math.pi)
    b_n: float = 1.0


DIM3 = DimensionConstants()


@dataclass(frozen=True)
class SphericalGrid:
    """Gauss-Legendre x uniform product grid on the unit sphere.

    Nodes are ordered ring-major: node ``i * n_phi + j`` sits at colatitude
    ``theta[i]`` and longitude ``phi[j]``.  All nodes of a ring share the
    weight ``ring_weight[i]`` and the weights sum to 4*pi.
    """

    n_theta: int
    n_phi: int
    nodes: np.ndarray        # (N, 3) unit vectors
    weights: np.ndarray      # (N,) positive quadrature weights
    theta: np.ndarray        # (n_theta,) ring colatitudes, increasing
    phi: np.ndarray          # (n_phi,) longitudes
    cos_theta: np.ndarray    # (n_theta,) = cos(theta), decreasing
    ring_weight: np.ndarray  # (n_theta,) per-node weight within each ring

    @property
    def n_nodes(self):
        return self.n_theta * self.n_phi

    @property
    def rings(self):
        """List of index arrays, one per latitude ring."""
        base = np.arange(self.n_phi)
        return [base + i * self.n_phi for i in range(self.n_theta)]

    def ring_view(self, values):
        """Reshape node values to (n_theta, n_phi) without copying."""
        values = np.asarray(values)
        if values.shape != (self.n_nodes,):
            raise ValueError(
                f"expected {self.n_nodes} node values, got shape {values.shape}"
            )
        return values.reshape(self.n_theta, self.n_phi)

    def antipode_index(self):
        """Permutation mapping each node to its antipode (requires even n_phi)."""
        if self.n_phi % 2 != 0:
            raise ValueError("antipodal node map needs an even longitude count")
        i = np.arange(self.n_theta)[:, None]
        j = np.arange(self.n_phi)[None, :]
        idx = (self.n_theta - 1 - i) * self.n_phi + (j + self.n_phi // 2) % self.n_phi
        return idx.reshape(-1)

    def cap_mask(self, cap):
        """Boolean mask of the nodes lying inside a spherical cap."""
        return cap.contains(self.nodes)


def build_grid(n_theta, n_phi):
    """Build the product quadrature grid.

    Parameters
    ----------
    n_theta : int
        Number of Gauss-Legendre colatitude rings, at least 2.
    n_phi : int
        Number of uniformly spaced longitudes, at least 4.
    """
    if n_theta < 2:
        raise ValueError(f"n_theta must be >= 2, got {n_theta}")
    if n_phi < 4:
        raise ValueError(f"n_phi must be >= 4, got {n_phi}")
    t, glw = np.polynomial.legendre.leggauss(n_theta)
    order = np.argsort(-t)  # colatitude increasing from the north pole
    t, glw = t[order], glw[order]
    theta = np.arccos(t)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    sin_theta = np.sqrt(1.0 - t**2)
    nodes = np.empty((n_theta * n_phi, 3))
    nodes[:, 0] = np.outer(sin_theta, np.cos(phi)).reshape(-1)
    nodes[:, 1] = np.outer(sin_theta, np.sin(phi)).reshape(-1)
    nodes[:, 2] = np.repeat(t, n_phi)
    ring_weight = glw * (2.0 * np.pi / n_phi)
    weights = np.repeat(ring_weight, n_phi)
    return SphericalGrid(
        n_theta=n_theta,
        n_phi=n_phi,
        nodes=nodes,
        weights=weights,
        theta=theta,
        phi=phi,
        cos_theta=t,
        ring_weight=ring_weight,
    )


def integrate(grid, f):
    """Quadrature of node samples over the sphere.

    ``f`` may be a plain array of node values or any object exposing a
    ``values`` attribute of that shape.  The reduction uses numpy's pairwise
    summation in node order, so repeated runs are bit-identical.
    """
    values = np.asarray(getattr(f, "values", f), dtype=float)
    if values.shape != (grid.n_nodes,):
        raise ValueError(
            f"expected {grid.n_nodes} node values, got shape {values.shape}"
        )
    return float(np.sum(grid.weights * values))


def tangent_basis(u):
    """Deterministic orthonormal frame (eps1, eps2) spanning u-perp.

    Away from the poles eps1 = normalize(e3 x u); within 0.9 of the poles
    the frame switches to eps1 = normalize(e1 - <e1,u> u) to avoid the
    degeneracy.  Always eps2 = u x eps1, so (eps1, eps2, u) is a
    right-handed orthonormal triple.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    pts = np.atleast_2d(u)
    eps1 = np.empty_like(pts)
    polar = np.abs(pts[:, 2]) >= 0.9
    gen = ~polar
    if np.any(gen):
        v = np.cross(np.broadcast_to(E3, pts[gen].shape), pts[gen])
        eps1[gen] = v / np.linalg.norm(v, axis=1, keepdims=True)
    if np.any(polar):
        v = E1 - pts[polar, 0:1] * pts[polar]
        eps1[polar] = v / np.linalg.norm(v, axis=1, keepdims=True)
    eps2 = np.cross(pts, eps1)
    if single:
        return eps1[0], eps2[0]
    return eps1, eps2


@dataclass(frozen=True)
class GreatCircle:
    """Equispaced nodes on the great circle orthogonal to ``normal``.

    The trapezoidal weight 2*pi/m per node is spectrally accurate for
    smooth periodic integrands, and exact for trigonometric polynomials of
    degree < m in the circle angle.
    """

    normal: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray
    m: int
    angles: np.ndarray

    @property
    def weight(self):
        return 2.0 * np.pi / self.m

    @property
    def nodes(self):
        c, s = np.cos(self.angles), np.sin(self.angles)
        return np.outer(c, self.eps1) + np.outer(s, self.eps2)

    def point(self, alpha):
        """Circle point at angle alpha (alpha may be an array)."""
        alpha = np.asarray(alpha, dtype=float)
        return (
            np.multiply.outer(np.cos(alpha), self.eps1)
            + np.multiply.outer(np.sin(alpha), self.eps2)
        )


def great_circle(u, m=256):
    """Great circle S^2 ∩ u-perp with m equispaced quadrature nodes."""
    if m < 8:
        raise ValueError(f"need at least 8 circle nodes, got {m}")
    u = np.asarray(u, dtype=float)
    nrm = np.linalg.norm(u)
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError(f"circle normal must be a unit vector, |u| = {nrm}")
    eps1, eps2 = tangent_basis(u)
    angles = 2.0 * np.pi * np.arange(m) / m
    return GreatCircle(normal=u, eps1=eps1, eps2=eps2, m=m, angles=angles)


def _as_evaluator(g):
    """Turn g into a callable on (M, 3) unit vectors.

    Accepts a callable directly, or any object with an ``evaluate`` method
    (a spherical function carrying a harmonic expansion).  Objects holding
    only grid samples cannot be evaluated off-grid and are rejected.
    """
    if callable(g):
        return g
    evaluate = getattr(g, "evaluate", None)
    if evaluate is not None:
        return evaluate
    raise ValueError(
        "integrand has grid samples only and no evaluation rule; "
        "attach a harmonic expansion first"
    )


def circle_integrate(g, circle):
    """Quadrature of g over a great circle (H^1 line measure)."""
    values = np.asarray(_as_evaluator(g)(circle.nodes), dtype=float)
    return float(circle.weight * np.sum(values))


@dataclass(frozen=True)
class Cap:
    """Open spherical cap {x : <x, center> > height}, 0 < height < 1."""

    center: np.ndarray
    height: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise ValueError("cap center must be a unit vector")
        if not 0.0 < self.height < 1.0:
            raise ValueError(f"cap height must lie in (0, 1), got {self.height}")
        object.__setattr__(self, "center", c)

    @property
    def radius(self):
        """Geodesic radius of the cap."""
        return math.acos(self.height)

    def contains(self, points):
        points = np.asarray(points, dtype=float)
        return points @ self.center > self.height

    def antipodal(self):
        return Cap(center=-self.center, height=self.height)

    def separation(self, other):
        """Geodesic distance between two caps (0 if they overlap)."""
        gap = math.acos(
            float(np.clip(np.dot(self.center, other.center), -1.0, 1.0))
        )
        return max(0.0, gap - self.radius - other.radius)

    def sample(self, count, rng):
        """Uniform random points inside the cap."""
        t = rng.uniform(self.height, 1.0, size=count)
        ang = rng.uniform(0.0, 2.0 * np.pi, size=count)
        r = np.sqrt(1.0 - t**2)
        eps1, eps2 = tangent_basis(self.center)
        return (
            np.outer(t, self.center)
            + np.outer(r * np.cos(ang), eps1)
            + np.outer(r * np.sin(ang), eps2)
        )


def grid_to_csv(path, grid, values):
    """Dump node samples as CSV with header theta,phi,weight,value."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_nodes,):
        raise ValueError("value column must match the grid size")
    theta = np.repeat(grid.theta, grid.n_phi)
    phi = np.tile(grid.phi, grid.n_theta)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("theta,phi,weight,value\n")
        for th, ph, w, v in zip(theta, phi, grid.weights, values):
            fh.write(f"{th:.17g},{ph:.17g},{w:.17g},{v:.17g}\n")


def grid_from_csv(path, grid):
    """Read a value column dumped by grid_to_csv, validating the layout."""
    values = np.empty(grid.n_nodes)
    theta = np.repeat(grid.theta, grid.n_phi)
    phi = np.tile(grid.phi, grid.n_theta)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "theta,phi,weight,value":
            raise ValueError(f"line 1: expected header theta,phi,weight,value, got {header!r}")
        for k in range(grid.n_nodes):
            line = fh.readline()
            if not line:
                raise ValueError(f"line {k + 2}: unexpected end of file")
            parts = line.strip().split(",")
            if len(parts) != 4:
                raise ValueError(f"line {k + 2}: expected 4 columns, got {len(parts)}")
            try:
                th, ph, _w, v = (float(p) for p in parts)
            except ValueError as exc:
                raise ValueError(f"line {k + 2}: {exc}") from None
            if abs(th - theta[k]) > 1e-9 or abs(ph - phi[k]) > 1e-9:
                raise ValueError(f"line {k + 2}: node does not match the grid layout")
            values[k] = v
        if fh.readline():
            raise ValueError(f"line {grid.n_nodes + 2}: trailing data after grid rows")
    return values
