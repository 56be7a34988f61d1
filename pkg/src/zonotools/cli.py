"""Batch front-end: transforms over CSV grids, counterexample builds and
the verification suites, with machine-readable JSON reports.

Exit codes: 0 all assertions pass, 2 assertion failure, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from zonotools import __version__, harmonics, sphere, transforms, zonoid
from zonotools import convex
from zonotools.convex import fixtures

SUITES = (
    "newton",
    "af",
    "sr",
    "isotropy-gap",
    "rigidity",
    "minkowski-rev",
    "umbilic",
    "all",
)

DEFAULT_TOLERANCES = {
    "multiplier": 1e-10,
    "calibration_funk": 1e-7,
    "calibration_area": 1e-6,
    "sr_l1": 1e-10,
    "sr_identity": 1e-6,
    "sr_identity_closed": 1e-12,
    "sr_convergence": 1e-6,
    "gap_iso": 1e-8,
    "dev_iso": 1e-4,
    "gap_oracle": 1e-6,
    "isotropy_dev": 1e-5,
    "funk_gap": 5e-3,
    "affine_residual": 1e-4,
    "funk_residual": 1e-4,
    "a_ratio": 1e-6,
    "newton_slack": 1e-10,
    "af_slack": 1e-9,
    "mink_band": 1e-6,
    "mink_outside": 1e-8,
    "umbilic_ball": 1e-10,
    "umbilic_zonoid": 1e-4,
    "umbilic_fail_floor": 1e-2,
    "nonconstancy_ratio": 0.1,
}


@dataclass
class RunConfig:
    n_theta: int = 64
    n_phi: int = 128
    band: int = 48
    circle_m: int = 256
    cap_u_center: tuple = (0.0, 0.0, 1.0)
    cap_u_height: float = 0.9
    cap_v_center: tuple = (1.0, 0.0, 0.0)
    cap_v_height: float = 0.9
    transition: float = 0.3
    seed: int = 1234
    out: str = "zonotools_out"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def cap_u(self):
        c = np.asarray(self.cap_u_center, dtype=float)
        return sphere.Cap(center=c / np.linalg.norm(c), height=self.cap_u_height)

    def cap_v(self):
        c = np.asarray(self.cap_v_center, dtype=float)
        return sphere.Cap(center=c / np.linalg.norm(c), height=self.cap_v_height)

    def echo(self):
        return {
            "grid": [self.n_theta, self.n_phi],
            "band": self.band,
            "circle_m": self.circle_m,
            "cap_u_center": list(self.cap_u_center),
            "cap_u_height": self.cap_u_height,
            "cap_v_center": list(self.cap_v_center),
            "cap_v_height": self.cap_v_height,
            "transition": self.transition,
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
        }


class ConfigError(ValueError):
    pass


def parse_config_file(path):
    """Plain UTF-8 key=value config; unknown keys are errors (fail loud)."""
    cfg = RunConfig()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            try:
                if key == "grid":
                    t, p = value.split(",")
                    cfg.n_theta, cfg.n_phi = int(t), int(p)
                elif key == "band":
                    cfg.band = int(value)
                elif key == "circle_m":
                    cfg.circle_m = int(value)
                elif key == "cap_u_center":
                    cfg.cap_u_center = tuple(float(v) for v in value.split(","))
                elif key == "cap_u_height":
                    cfg.cap_u_height = float(value)
                elif key == "cap_v_center":
                    cfg.cap_v_center = tuple(float(v) for v in value.split(","))
                elif key == "cap_v_height":
                    cfg.cap_v_height = float(value)
                elif key == "transition":
                    cfg.transition = float(value)
                elif key == "seed":
                    cfg.seed = int(value)
                elif key == "out":
                    cfg.out = value
                elif key.startswith("tol_"):
                    name = key[4:]
                    if name not in cfg.tolerances:
                        raise ConfigError(f"{path}:{lineno}: unknown tolerance {name!r}")
                    val = float(value)
                    if val <= 0:
                        raise ConfigError(f"{path}:{lineno}: tolerances must be positive")
                    cfg.tolerances[name] = val
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return cfg


def _apply_flags(cfg, args):
    if args.grid:
        t, p = args.grid.split(",")
        cfg.n_theta, cfg.n_phi = int(t), int(p)
    if args.band is not None:
        cfg.band = args.band
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    return cfg


class RunContext:
    """Caches the grid and the counterexample build across suites."""

    def __init__(self, cfg):
        self.cfg = cfg
        self._grid = None
        self._counterexample = None

    @property
    def grid(self):
        if self._grid is None:
            self._grid = sphere.build_grid(self.cfg.n_theta, self.cfg.n_phi)
        return self._grid

    @property
    def counterexample(self):
        if self._counterexample is None:
            self._counterexample = zonoid.build_counterexample(
                self.cfg.cap_u(),
                self.cfg.cap_v(),
                self.grid,
                L=self.cfg.band,
                transition=self.cfg.transition,
            )
        return self._counterexample

    def rng(self, salt=0):
        return np.random.default_rng(self.cfg.seed + salt)


def _row(test_id, anchor, metric, tolerance, ok):
    return {
        "test_id": test_id,
        "paper_anchor": anchor,
        "metric": float(metric),
        "tolerance": float(tolerance),
        "pass": bool(ok),
    }


# ----------------------------------------------------------------------
# Verification suites
# ----------------------------------------------------------------------

def suite_newton(ctx):
    grid = ctx.grid
    tol = ctx.cfg.tolerances["newton_slack"]
    rng = ctx.rng(1)
    worst = np.inf
    equality_violations = 0
    for _ in range(50):
        h = convex.random_support_function(grid, rng)
        rep = convex.newton_report(h)
        worst = min(worst, rep["min_gap"])
        if rep["equality"].all():
            equality_violations += 1  # a random perturbation must not look umbilic
    ball = convex.SupportFunction.ball(grid, 1.0)
    ball_gap = float(np.max(np.abs(convex.newton_report(ball)["gap"])))
    return [
        _row("newton-nonnegative-gap", "newton-inequality", worst, -tol, worst >= -tol),
        _row("newton-ball-equality", "newton-inequality-equality-case", ball_gap, tol, ball_gap <= tol),
        _row(
            "newton-random-strict",
            "newton-inequality-equality-case",
            equality_violations,
            0.5,
            equality_violations == 0,
        ),
    ]


def suite_af(ctx):
    grid = ctx.grid
    tol = ctx.cfg.tolerances["af_slack"]
    rng = ctx.rng(2)
    ball = convex.SupportFunction.ball(grid, 1.0)
    worst = np.inf
    flagged = 0
    for _ in range(100):
        K = convex.random_support_function(grid, rng, band=6)
        Lb = convex.random_support_function(grid, rng, band=6)
        vkl = convex.mixed_volume(K, Lb, ball)
        vkk = convex.mixed_volume(K, K, ball)
        vll = convex.mixed_volume(Lb, Lb, ball)
        slack = (vkl * vkl - vkk * vll) / (vkl * vkl)
        worst = min(worst, slack)
        if slack < tol:
            flagged += 1
    # the homothetic pair: equality must be flagged
    ball2 = convex.SupportFunction.ball(grid, 1.7)
    veq = convex.mixed_volume(ball, ball2, ball)
    eq_slack = abs(
        veq * veq - convex.mixed_volume(ball, ball, ball) * convex.mixed_volume(ball2, ball2, ball)
    ) / (veq * veq)
    return [
        _row("af-inequality-random-pairs", "alexandrov-fenchel", worst, -tol, worst >= -tol),
        _row("af-equality-flags-ball-only", "alexandrov-fenchel-equality", flagged, 0.5, flagged == 0),
        _row("af-ball-pair-equality", "alexandrov-fenchel-equality", eq_slack, tol, eq_slack <= tol),
    ]


def suite_sr(ctx):
    grid = ctx.grid
    tols = ctx.cfg.tolerances
    rng = ctx.rng(3)
    rows = []
    worst_l1, worst_l2, worst_l3, worst_jensen = 0.0, 0.0, 0.0, 0.0
    for _ in range(100):
        c = harmonics.HarmonicCoeffs.zeros(24)
        c.c = rng.normal(size=c.c.size)
        f = transforms.SphericalFunction.from_coeffs(grid, c)
        shift = abs(float(np.min(f.values))) + 0.1
        c.set(0, 0, c.get(0, 0) + shift * math.sqrt(4.0 * math.pi))
        f = transforms.SphericalFunction.from_coeffs(grid, c)
        sr = transforms.radial_symmetrize(f)
        l1f = transforms.lp_norm(f, 1)
        worst_l1 = max(worst_l1, abs(l1f - transforms.lp_norm(sr, 1)) / l1f)
        worst_l2 = max(worst_l2, transforms.lp_norm(sr, 2) - transforms.lp_norm(f, 2))
        worst_l3 = max(worst_l3, transforms.lp_norm(sr, 3) - transforms.lp_norm(f, 3))
        f2 = transforms.SphericalFunction(grid=grid, values=f.values**2)
        sr2 = transforms.radial_symmetrize(f2)
        worst_jensen = max(
            worst_jensen, float(np.max(sr.values - np.sqrt(np.maximum(sr2.values, 0.0))))
        )
    rows.append(_row("sr-l1-preserved", "radial-symmetrization-l1", worst_l1, tols["sr_l1"], worst_l1 <= tols["sr_l1"]))
    rows.append(_row("sr-l2-contraction", "radial-symmetrization-lp-contraction", worst_l2, 1e-12, worst_l2 <= 1e-12))
    rows.append(_row("sr-l3-contraction", "radial-symmetrization-lp-contraction", worst_l3, 1e-12, worst_l3 <= 1e-12))
    rows.append(_row("sr-jensen-pointwise", "symmetrization-power-mean", worst_jensen, 1e-12, worst_jensen <= 1e-12))

    one = transforms.SphericalFunction(grid=grid, values=np.ones(grid.n_nodes)).with_coeffs(4)
    lhs, rhs = transforms.sr_profile_l1_identity(one)
    closed = abs(rhs - 4.0 * math.pi)
    rows.append(
        _row("sr-slicing-identity-constant", "polar-slicing-identity", closed, tols["sr_identity_closed"], closed <= tols["sr_identity_closed"])
    )
    c = harmonics.HarmonicCoeffs.zeros(24)
    c.c = ctx.rng(4).normal(size=c.c.size)
    f = transforms.SphericalFunction.from_coeffs(grid, c)
    c.set(0, 0, c.get(0, 0) + (abs(float(np.min(f.values))) + 0.1) * math.sqrt(4.0 * math.pi))
    f = transforms.SphericalFunction.from_coeffs(grid, c)
    lhs, rhs = transforms.sr_profile_l1_identity(f)
    ident = abs(lhs - rhs) / lhs
    rows.append(_row("sr-slicing-identity-general", "polar-slicing-identity", ident, tols["sr_identity"], ident <= tols["sr_identity"]))

    sr = transforms.radial_symmetrize(f)
    sr2 = transforms.radial_symmetrize(sr)
    idem = 0.0 if np.array_equal(sr.values, sr2.values) else 1.0
    rows.append(_row("sr-idempotent-bitwise", "symmetrization-idempotence", idem, 0.5, idem == 0.0))

    c16 = harmonics.HarmonicCoeffs.zeros(16)
    c16.c = ctx.rng(5).normal(size=c16.c.size)
    f16 = transforms.SphericalFunction.from_coeffs(grid, c16)
    target = transforms.radial_symmetrize(f16)
    dists = []
    for mrot in (1, 2, 4, 8, 16, 32, 64):
        avg = transforms.finite_average(f16, [2.0 * math.pi * k / mrot for k in range(mrot)])
        dists.append(transforms.l2_distance(avg, target))
    monotone = all(dists[i + 1] <= dists[i] + 1e-12 for i in range(len(dists) - 1))
    rows.append(
        _row("sr-rotation-average-converges", "rotation-average-convergence", dists[-1], tols["sr_convergence"], dists[-1] <= tols["sr_convergence"] and monotone)
    )
    return rows


def _isotropy_corpus(ctx, n_cases=200):
    """Mixed corpus of (density, direction) cases with known character."""
    grid = ctx.grid
    rng = ctx.rng(6)
    cases = []
    for k in range(n_cases // 2):
        # zonal density about a random axis, probed along that axis:
        # the orthogonal circle is a latitude circle, so the section is
        # constant, hence isotropic
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        c = harmonics.HarmonicCoeffs.zeros(12)
        zl = rng.normal(size=7)
        e1, e2 = sphere.tangent_basis(axis)
        R = np.stack([e1, e2, axis], axis=1)
        vals = np.zeros(grid.n_nodes)
        tt = grid.nodes @ axis
        for i, l in enumerate(range(0, 13, 2)):
            pl = np.polynomial.legendre.legval(tt, [0.0] * l + [1.0])
            vals += zl[i] * pl
        vals = vals - vals.min() + 0.2
        f = transforms.SphericalFunction(grid=grid, values=vals).with_coeffs(12)
        cases.append((f, axis, True))
    for k in range(n_cases - n_cases // 2):
        c = harmonics.HarmonicCoeffs.zeros(12)
        for l in range(0, 13, 2):
            for m in range(-l, l + 1):
                c.set(l, m, rng.normal())
        v = harmonics.synthesize_grid(c, grid)
        c.set(0, 0, c.get(0, 0) + (abs(float(np.min(v))) + 0.2) * math.sqrt(4.0 * math.pi))
        f = transforms.SphericalFunction.from_coeffs(grid, c, parity="even")
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        cases.append((f, u, False))
    return cases


def suite_isotropy_gap(ctx):
    tols = ctx.cfg.tolerances
    m = ctx.cfg.circle_m
    rows = []
    equiv_ok = True
    oracle_worst = 0.0
    for f, u, isotropic in _isotropy_corpus(ctx):
        spec = zonoid.make_zonoid(f)
        rep = zonoid.isotropy_gap_report(spec, u, m=m)
        small_gap = rep["gap"] < tols["gap_iso"]
        small_dev = rep["dev"] < tols["dev_iso"]
        if small_gap != small_dev:
            equiv_ok = False
        if isotropic and not (small_gap and small_dev):
            equiv_ok = False
        if not isotropic and (small_gap or small_dev):
            equiv_ok = False
        raw_gap = rep["f1"] ** 2 - rep["f2"]
        mass = transforms.circle_fourier_mass(spec.g, u, degree=2, m=m)
        # raw_gap is a difference of O(f2)-sized quantities, so below
        # ~eps*f2 it is cancellation noise; the identity is measured
        # relative to the larger of the two sides with that floor.
        scale = max(abs(raw_gap), abs(mass), tols["gap_oracle"] * rep["f2"])
        oracle_worst = max(oracle_worst, abs(raw_gap - mass) / scale)
    rows.append(
        _row("isotropy-gap-equivalence", "isotropic-sections-iff-density-gap", 0.0 if equiv_ok else 1.0, 0.5, equiv_ok)
    )
    rows.append(
        _row("gap-equals-circle-fourier-mass", "density-gap-fourier-oracle", oracle_worst, tols["gap_oracle"], oracle_worst <= tols["gap_oracle"])
    )
    return rows


def suite_rigidity(ctx):
    tols = ctx.cfg.tolerances
    grid = ctx.grid
    rows = []
    # ball: exact rigidity
    c = harmonics.HarmonicCoeffs.zeros(8)
    c.set(0, 0, (1.0 / (2.0 * math.pi)) * math.sqrt(4.0 * math.pi))
    ball_spec = zonoid.make_zonoid(
        transforms.SphericalFunction.from_coeffs(grid, c, parity="even")
    )
    rep = zonoid.verify_local_rigidity(ball_spec, ctx.cfg.cap_u())
    rows.append(_row("rigidity-ball-affine", "local-rigidity-affine-support", rep.affine_residual, 1e-10, rep.affine_residual <= 1e-10))
    rows.append(_row("rigidity-ball-funk", "local-rigidity-funk-constant", rep.funk_residual, 1e-10, rep.funk_residual <= 1e-10))
    # constructed counterexample
    res = ctx.counterexample
    spec = zonoid.make_zonoid(res.g)
    rep = zonoid.verify_local_rigidity(spec, ctx.cfg.cap_u())
    a_ratio = float(np.linalg.norm(rep.a)) / rep.c
    rows.append(
        _row("rigidity-counterexample-affine", "local-rigidity-affine-support", rep.affine_residual, tols["affine_residual"], rep.affine_residual < tols["affine_residual"])
    )
    rows.append(
        _row("rigidity-counterexample-funk", "local-rigidity-funk-constant", rep.funk_residual, tols["funk_residual"], rep.funk_residual < tols["funk_residual"])
    )
    rows.append(_row("rigidity-even-density-zero-drift", "even-density-affine-term", a_ratio, tols["a_ratio"], a_ratio < tols["a_ratio"]))
    # negative control: anisotropic density must fail the fits
    cneg = harmonics.HarmonicCoeffs.zeros(8)
    cneg.set(0, 0, math.sqrt(4.0 * math.pi))
    cneg.set(2, 0, 0.35 * math.sqrt(4.0 * math.pi))
    vneg = harmonics.synthesize_grid(cneg, grid)
    if vneg.min() <= 0:
        cneg.set(0, 0, cneg.get(0, 0) + (abs(vneg.min()) + 0.1) * math.sqrt(4.0 * math.pi))
    neg_spec = zonoid.make_zonoid(
        transforms.SphericalFunction.from_coeffs(grid, cneg, parity="even")
    )
    rep = zonoid.verify_local_rigidity(neg_spec, ctx.cfg.cap_v())
    neg_resid = min(rep.affine_residual, rep.funk_residual)
    rows.append(
        _row("rigidity-negative-control", "local-rigidity-affine-support", neg_resid, tols["affine_residual"], neg_resid > tols["affine_residual"])
    )
    return rows


def suite_minkowski_rev(ctx):
    tols = ctx.cfg.tolerances
    rows = []
    source = fixtures.Ball(1.0).body(8193)
    cap = sphere.Cap(np.array([0.0, 0.0, 1.0]), 0.5)
    edges = np.concatenate(
        [[-1.0], np.linspace(-0.95, -0.5, 6), [0.0], np.linspace(0.5, 0.95, 6), [1.0]]
    )
    mu = convex.prescribed_cap_measure(source, cap.height, edges)
    try:
        solved = convex.minkowski_solve_revolution(
            mu, source, cap, rel_tol=tols["mink_band"], outside_tol=tols["mink_outside"]
        )
    except ValueError as exc:
        rows.append(_row("minkowski-roundtrip", "minkowski-existence-revolution", math.inf, tols["mink_band"], False))
        return rows
    got = convex.surface_area_measure_zonal(solved, edges)
    inside = (edges[:-1] >= cap.height) | (edges[1:] <= -cap.height)
    scale = max(float(np.max(mu.masses[inside])), 1e-30)
    band_err = float(np.max(np.abs(got.masses[inside] - mu.masses[inside]))) / scale
    outside = got.total_mass() - got.mass_in(cap.height, 1.0) - got.mass_in(-1.0, -cap.height)
    rows.append(_row("minkowski-roundtrip-bands", "minkowski-existence-revolution", band_err, tols["mink_band"], band_err <= tols["mink_band"]))
    rows.append(_row("minkowski-no-mass-outside", "cap-restricted-measure-support", abs(outside), tols["mink_outside"], abs(outside) <= tols["mink_outside"]))
    lens = fixtures.Lens(r=1.0, c=0.5)
    ts = np.linspace(-1.0, 1.0, 81)
    support_err = float(
        np.max(np.abs(convex.profile_to_support(solved).at(ts) - lens.support(ts)))
    )
    rows.append(_row("minkowski-solution-is-lens", "two-ball-intersection-witness", support_err, 1e-6, support_err <= 1e-6))
    return rows


def suite_umbilic(ctx):
    tols = ctx.cfg.tolerances
    grid = ctx.grid
    rows = []
    ball = convex.SupportFunction.ball(grid, 1.0)
    rep = convex.umbilic_sphere_check(ball, ctx.cfg.cap_u(), tol=1e-6)
    rows.append(
        _row("umbilic-ball-fit", "umbilic-cap-implies-sphere", rep.residual if rep.residual is not None else math.inf, tols["umbilic_ball"], rep.is_umbilic and rep.residual <= tols["umbilic_ball"])
    )
    # counterexample zonoid: spherical patch over the cap
    spec = zonoid.make_zonoid(ctx.counterexample.g)
    rep = convex.umbilic_sphere_check(spec.h, ctx.cfg.cap_u(), tol=1e-3)
    ok = rep.is_umbilic and rep.residual <= tols["umbilic_zonoid"]
    rows.append(
        _row("umbilic-counterexample-zonoid", "umbilic-cap-implies-sphere", rep.residual if rep.residual is not None else math.inf, tols["umbilic_zonoid"], ok)
    )
    # spherocylinder over an equator-crossing cap: radii look umbilic but
    # one sphere cannot fit (singular equator part of the first area measure)
    sc = fixtures.Spherocylinder(1.0, 0.6)
    cap = sphere.Cap(np.array([1.0, 0.0, 0.0]), 0.5)
    mask = grid.cap_mask(cap)
    t = grid.nodes[mask][:, 2]
    r1, r2 = sc.radii(t)
    pts = sc.boundary_points(grid.nodes[mask])
    screp = convex.umbilic_sphere_check_data(r1, r2, pts, tol=1e-6)
    ok = screp.is_umbilic and screp.residual > tols["umbilic_fail_floor"]
    rows.append(
        _row("umbilic-spherocylinder-fit-fails", "umbilic-needs-absolutely-continuous-measure", screp.residual if screp.residual is not None else 0.0, tols["umbilic_fail_floor"], ok)
    )
    # lens: equal curvatures on each smooth piece, radii split on the fan
    lens = fixtures.Lens()
    fan_cap = sphere.Cap(np.array([1.0, 0.0, 0.0]), 0.7)
    mask = grid.cap_mask(fan_cap)
    t = grid.nodes[mask][:, 2]
    r1, r2 = lens.radii(t)
    pts = lens.boundary_points(grid.nodes[mask])
    lrep = convex.umbilic_sphere_check_data(r1, r2, pts, tol=1e-6)
    cap_zone = np.abs(t) >= lens.t_edge
    curv_equal = bool(np.all(np.abs(r1[cap_zone] - r2[cap_zone]) <= 1e-12))
    rows.append(
        _row("lens-smooth-pieces-equal-curvatures", "equal-curvatures-insufficient", 0.0 if curv_equal else 1.0, 0.5, curv_equal)
    )
    rows.append(
        _row("lens-radii-split-on-fan", "equal-curvatures-insufficient", lrep.max_radii_split, 0.5, (not lrep.is_umbilic) and lrep.max_radii_split > 0.5)
    )
    return rows


def suite_counterexample(ctx):
    res = ctx.counterexample
    rows, _ = zonoid.counterexample_assertions(
        res,
        ctx.rng(7),
        m=ctx.cfg.circle_m,
        tolerances={
            "isotropy_dev": ctx.cfg.tolerances["isotropy_dev"],
            "funk_gap": ctx.cfg.tolerances["funk_gap"],
            "nonconstancy_ratio": ctx.cfg.tolerances["nonconstancy_ratio"],
        },
    )
    for r in rows:
        r["paper_anchor"] = "isotropic-sections-counterexample"
    return rows


SUITE_RUNNERS = {
    "newton": suite_newton,
    "af": suite_af,
    "sr": suite_sr,
    "isotropy-gap": suite_isotropy_gap,
    "rigidity": suite_rigidity,
    "minkowski-rev": suite_minkowski_rev,
    "umbilic": suite_umbilic,
}


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def cmd_transform(cfg, which, input_path, output_path):
    grid = sphere.build_grid(cfg.n_theta, cfg.n_phi)
    try:
        values = sphere.grid_from_csv(input_path, grid)
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    f = transforms.SphericalFunction(grid=grid, values=values)
    if which == "cosine":
        out = transforms.cosine_transform(f)
    elif which == "funk":
        out = transforms.funk_transform(f.with_coeffs(cfg.band), m=cfg.circle_m)
    elif which == "symmetrize":
        out = transforms.radial_symmetrize(f)
    else:
        print(f"unknown transform {which!r}", file=sys.stderr)
        return 3
    sphere.grid_to_csv(output_path, grid, out.values)
    return 0


def cmd_counterexample(cfg):
    ctx = RunContext(cfg)
    try:
        res = ctx.counterexample
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    rows = suite_counterexample(ctx)
    budget = res.diagnostics["residual_budget"]
    os.makedirs(cfg.out, exist_ok=True)
    res.save(cfg.out)
    report = {
        "version": __version__,
        "config_echo": cfg.echo(),
        "results": rows,
    }
    diag_extra = dict(res.diagnostics)
    diag_extra["isotropy_max_dev_on_U"] = rows[0]["metric"]
    diag_extra["funk_gap_UV_error"] = rows[1]["metric"]
    with open(os.path.join(cfg.out, "diagnostics.json"), "w", encoding="utf-8") as fh:
        json.dump(diag_extra, fh, indent=2, sort_keys=True)
    with open(os.path.join(cfg.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    for r in rows:
        status = "PASS" if r["pass"] else "FAIL"
        print(
            f"[{status}] {r['test_id']}: metric {r['metric']:.3e} vs tolerance "
            f"{r['tolerance']:.3e} (measured residual budget {budget:.3e})"
        )
    return 0 if all(r["pass"] for r in rows) else 2


def cmd_verify(cfg, suite):
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return 3
    ctx = RunContext(cfg)
    names = list(SUITE_RUNNERS) if suite == "all" else [suite]
    results = []
    for name in names:
        results.extend(SUITE_RUNNERS[name](ctx))
    report = {
        "version": __version__,
        "config_echo": cfg.echo(),
        "results": results,
    }
    os.makedirs(cfg.out, exist_ok=True)
    out_path = os.path.join(cfg.out, f"verify_{suite}.json")
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    for r in results:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"[{status}] {r['test_id']}: {r['metric']:.6e} vs {r['tolerance']:.1e}")
    print(f"report written to {out_path}")
    return 0 if all(r["pass"] for r in results) else 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="zonotools",
        description="Sphere transforms, convex-body checks and zonoid verification suites",
    )
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--grid", help="n_theta,n_phi")
    parser.add_argument("--band", type=int, help="harmonic band limit")
    parser.add_argument("--seed", type=int, help="RNG seed")
    parser.add_argument("--out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    p_tr = sub.add_parser("transform", help="transform a grid CSV")
    p_tr.add_argument("--which", required=True, choices=["cosine", "funk", "symmetrize"])
    p_tr.add_argument("--input", required=True)
    p_tr.add_argument("--output", required=True)
    sub.add_parser("counterexample", help="build and check the counterexample density")
    p_vf = sub.add_parser("verify", help="run a verification suite")
    p_vf.add_argument("--suite", required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config_file(args.config) if args.config else RunConfig()
        cfg = _apply_flags(cfg, args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    if args.command == "transform":
        return cmd_transform(cfg, args.which, args.input, args.output)
    if args.command == "counterexample":
        return cmd_counterexample(cfg)
    if args.command == "verify":
        return cmd_verify(cfg, args.suite)
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
