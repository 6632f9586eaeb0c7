"""Characteristic-flow analysis tests on closed-form fields."""

import math

import numpy as np
import pytest

from henckyflow.analysis import (
    BumpNotInsideZone,
    EmptyZone,
    NoDirichletIntersection,
    SeedOutsideZone,
    check_fan_trace_agreement,
    check_lipschitz,
    check_non_intersection,
    check_ordering,
    check_sigma_constancy,
    check_u_constancy,
    classify,
    detect_fans,
    entropy_defect,
    extract_plastic_zone,
    seed_and_trace,
    trace,
)
from henckyflow.domains import shear_trapezoid, square, unit_square, vortex_sector
from henckyflow.mesh import triangulate
from henckyflow.oracles import (
    Family453Oracle,
    FanOracle,
    MonotoneTable,
    TrapezoidOracle,
    fan_eval,
    family453_eval,
    oracle_fields_on_mesh,
    step_z_profile,
)
from henckyflow.solver import SolveResult

SQRT2 = np.sqrt(2.0)


def constant_field_result(mesh, sigma_const, domain=None):
    """Solver-shaped fields for a constant unit stress with u = sigma . x."""
    sigma = np.tile(np.asarray(sigma_const, dtype=float), (mesh.n_triangles, 1))
    u = mesh.nodes @ np.asarray(sigma_const, dtype=float)
    return SolveResult(
        u=u, sigma=sigma, p=np.zeros_like(sigma), p_norm=np.zeros(mesh.n_triangles),
        energy_history=[], div_residual=0.0, eps_final=0.0, stage_sigmas=[sigma],
        mesh=mesh, domain=domain,
    )


@pytest.fixture(scope="module")
def trapezoid_oracle_fields():
    dom = shear_trapezoid()
    mesh = triangulate(dom, 1 / 32)
    orc = TrapezoidOracle(1.0, 2.0, 1.2, step_z_profile(1.0, 2.0, 1.2))
    return mesh, dom, oracle_fields_on_mesh(orc, mesh, domain=dom)


@pytest.fixture(scope="module")
def fan_sector_fields():
    apex = (0.0, 0.0)
    th0, th1 = 0.35, 1.25
    prof = MonotoneTable([(th0 - 0.05, th0 - 0.05), (th1 + 0.05, th1 + 0.05)])
    fan = FanOracle(apex, +1, prof)
    h = 1 / 64
    dom = vortex_sector(apex, 3 * h, 1.0, th0, th1, lambda th: th)
    mesh = triangulate(dom, h)
    return mesh, dom, fan, oracle_fields_on_mesh(fan, mesh, domain=dom)


@pytest.fixture(scope="module")
def family_fields():
    orc = Family453Oracle(R=1.0)
    dom = square(0.2, 0.8)
    mesh = triangulate(dom, 1 / 64)
    return mesh, dom, orc, oracle_fields_on_mesh(orc, mesh, domain=dom)


class TestExtractZone:
    def test_elastic_empty(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (0.5, 0.0))
        with pytest.raises(EmptyZone):
            extract_plastic_zone(res, 0.02)

    def test_full_zone(self, trapezoid_oracle_fields):
        mesh, dom, res = trapezoid_oracle_fields
        zone = extract_plastic_zone(res, 0.02)
        assert zone.area >= 0.8 * dom.area()
        assert len(zone.outline) >= 1
        # outline of the full zone is the domain boundary
        d = dom.boundary_distance(np.concatenate(zone.outline))
        assert np.max(d) <= 1e-9

    def test_delta_out_of_range(self, trapezoid_oracle_fields):
        mesh, dom, res = trapezoid_oracle_fields
        with pytest.raises(ValueError):
            extract_plastic_zone(res, 0.7)


class TestTrace:
    def test_constant_field_vertical_line(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        zone = extract_plastic_zone(res, 0.02)
        ln = trace(zone, res.sigma, res.u, (0.5, 0.5), 0.02)
        ends = ln.endpoints[np.argsort(ln.endpoints[:, 1])]
        assert np.allclose(ends[0], [0.5, 0.0], atol=1e-3)
        assert np.allclose(ends[1], [0.5, 1.0], atol=1e-3)
        assert ln.sigma_deviation == 0.0
        assert abs(ln.direction @ res.sigma[ln.seed_triangle]) <= 1e-9

    def test_vortex_radial_line_exact_field(self):
        # exact callable field: deviation at machine precision on a radial ray
        apex = np.array([0.0, -1.0])
        fan = FanOracle(apex, +1, MonotoneTable([(0.2, 0.2), (2.9, 2.9)]))
        dom = square(-0.45, 0.45)
        v = dom.vertices + np.array([0.0, 0.55])  # shift to (0.55, 1.45) in y
        # build a square domain centered on the y-axis above the apex
        dom = square(-0.45, 0.45)
        mesh = triangulate(dom, 1 / 32)
        mesh = None
        from henckyflow.mesh import BoundarySegment, Dirichlet, Domain

        verts = np.array([(-0.4, 0.0), (0.4, 0.0), (0.4, 0.8), (-0.4, 0.8)])
        segs = tuple(
            BoundarySegment(tuple(verts[i]), tuple(verts[(i + 1) % 4]), Dirichlet(0.0))
            for i in range(4)
        )
        dom = Domain(verts, segs)
        mesh = triangulate(dom, 1 / 32)
        res = oracle_fields_on_mesh(fan, mesh, domain=dom)
        zone = extract_plastic_zone(res, 0.02)
        sig_exact = lambda pt: fan_eval(fan, pt)[0]
        u_exact = lambda pt: fan_eval(fan, pt)[1]
        ln = trace(zone, sig_exact, u_exact, (0.0, 0.4), 0.01)
        assert ln.sigma_deviation <= 1e-9
        assert ln.u_deviation <= 1e-9
        # the ray is radial: direction parallel to seed - apex
        ray = np.array([0.0, 1.4]) / 1.4
        assert abs(abs(ln.direction @ ray) - 1.0) <= 1e-9

    def test_trapezoid_oracle_diagonal(self, trapezoid_oracle_fields):
        mesh, dom, res = trapezoid_oracle_fields
        zone = extract_plastic_zone(res, 0.02)
        ln = trace(zone, res.sigma, res.u, (0.5, 0.75), mesh.h / 2)
        want = np.array([-1.0, 1.0]) / SQRT2
        cosang = abs(ln.direction @ want)
        assert math.degrees(math.acos(min(cosang, 1.0))) <= 2.0
        assert ln.sigma_deviation <= 0.05

    def test_seed_outside(self, trapezoid_oracle_fields):
        mesh, dom, res = trapezoid_oracle_fields
        zone = extract_plastic_zone(res, 0.02)
        with pytest.raises(SeedOutsideZone):
            trace(zone, res.sigma, res.u, (5.0, 5.0), 0.01)


class TestSeedAndTrace:
    def test_constant_field_dedup(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.25)
        assert len(lines) == 4  # one vertical line per seed column

    def test_vortex_lines_concur(self, fan_sector_fields):
        # exact field evaluation: all pairwise intersections at the apex
        mesh, dom, fan, res = fan_sector_fields
        zone = extract_plastic_zone(res, 0.02)
        sig = lambda pt: fan_eval(fan, pt)[0]
        uu = lambda pt: fan_eval(fan, pt)[1]
        lines = seed_and_trace(zone, sig, uu, 0.06, step=mesh.h / 2)
        assert len(lines) >= 5
        from henckyflow.analysis import _pairwise_intersections

        ipts, pairs = _pairwise_intersections(lines)
        d = np.linalg.norm(ipts - np.array(fan.apex), axis=1)
        assert np.max(d) <= 2 * mesh.h


class TestDetectFans:
    def test_parallel_lines_no_fans(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.2)
        assert detect_fans(lines, zone, 4 * mesh.h) == []

    def test_vortex_single_boundary_fan(self, fan_sector_fields):
        mesh, dom, fan, res = fan_sector_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.06, step=mesh.h / 2)
        fans = detect_fans(lines, zone, 5 * mesh.h)
        assert len(fans) == 1
        assert fans[0].kind == "boundary"
        assert np.linalg.norm(fans[0].apex - np.array(fan.apex)) <= 2 * mesh.h
        assert fans[0].alpha == 1

    def test_family_no_fans(self, family_fields):
        mesh, dom, orc, res = family_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.05, step=mesh.h / 2)
        assert len(lines) >= 5
        assert detect_fans(lines, zone, 5 * mesh.h) == []


class TestClassify:
    def test_trapezoid_constant_zone(self, trapezoid_oracle_fields):
        mesh, dom, res = trapezoid_oracle_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.1, step=mesh.h / 2)
        dec = classify(zone, res.sigma, lines)
        assert dec.fans == []
        assert len(dec.constant_zones) == 1
        sbar, tris = dec.constant_zones[0]
        assert np.linalg.norm(sbar - np.array([1, 1]) / SQRT2) <= 0.05
        assert dec.unclassified_area_fraction <= 0.1

    def test_vortex_fan_no_constants(self, fan_sector_fields):
        mesh, dom, fan, res = fan_sector_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.06, step=mesh.h / 2)
        dec = classify(zone, res.sigma, lines, cluster_radius=5 * mesh.h)
        assert len(dec.fans) == 1
        assert dec.constant_zones == []
        assert dec.unclassified_area_fraction <= 0.1

    def test_family_single_other_component(self, family_fields):
        mesh, dom, orc, res = family_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.05, step=mesh.h / 2)
        dec = classify(zone, res.sigma, lines, cluster_radius=5 * mesh.h)
        assert dec.fans == []
        assert dec.constant_zones == []
        assert len(dec.other_components) == 1
        other_area = float(np.sum(mesh.areas[dec.other_components[0]]))
        assert other_area >= 0.95 * zone.area


class TestOrdering:
    def test_constant_field(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        zone = extract_plastic_zone(res, 0.02)
        rep = check_ordering(res.sigma, zone, 2000, 0.02)
        assert rep.passed and rep.value == 0

    def test_vortex(self, fan_sector_fields):
        mesh, dom, fan, res = fan_sector_fields
        zone = extract_plastic_zone(res, 0.02)
        rep = check_ordering(res.sigma, zone, 10000, 0.02)
        assert rep.passed


class TestUConstancy:
    def test_globally_constant(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        res.u[:] = 3.0
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.2)
        rep = check_u_constancy(lines, tolerance=1e-12)
        assert rep.passed and rep.value == 0.0

    def test_trapezoid_oracle(self, trapezoid_oracle_fields):
        # u depends only on x+y: deviation on lines x+y=c is interpolation-level
        mesh, dom, res = trapezoid_oracle_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.1, step=mesh.h / 2)
        rep = check_u_constancy(lines, tolerance=2 * mesh.h)
        assert rep.passed

    def test_fan_oracle(self, fan_sector_fields):
        # u = angle: Lipschitz constant 1/r_min on the sector
        mesh, dom, fan, res = fan_sector_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.06, step=mesh.h / 2)
        lip = 1.0 / (3 * mesh.h)
        rep = check_u_constancy(lines, tolerance=2 * mesh.h * lip)
        assert rep.passed


class TestEntropyDefect:
    def test_constant_inactive_exact_zero(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        zone = extract_plastic_zone(res, 0.02)
        d = entropy_defect(res.sigma, zone, (-1.0, 0.0), (0.5, 0.5), 0.2)
        assert d == 0.0

    def test_constant_active_cancellation(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        zone = extract_plastic_zone(res, 0.02)
        d = entropy_defect(res.sigma, zone, (1.0, 0.0), (0.5, 0.5), 0.2)
        assert abs(d) <= 1e-10

    def test_vortex_defect_decays(self):
        apex = (0.5, -0.5)
        prof = MonotoneTable([(0.0, 0.0), (3.2, 3.2)])
        fan = FanOracle(apex, +1, prof)
        vals = {}
        for h in (1 / 32, 1 / 64):
            dom = unit_square()
            mesh = triangulate(dom, h)
            res = oracle_fields_on_mesh(fan, mesh, domain=dom)
            zone = extract_plastic_zone(res, 0.02)
            worst = 0.0
            for k in range(16):
                th = 2 * math.pi * k / 16
                xi = (math.cos(th), math.sin(th))
                worst = max(worst, abs(entropy_defect(res.sigma, zone, xi, (0.5, 0.5), 0.2)))
            vals[h] = worst
        assert vals[1 / 32] <= 2 * (1 / 32)
        assert vals[1 / 64] <= 2 * (1 / 64)
        # decay factor, unless both values already sit at quadrature noise
        assert vals[1 / 64] <= max(0.6 * vals[1 / 32], 1e-8)

    def test_bump_must_fit(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        zone = extract_plastic_zone(res, 0.02)
        with pytest.raises(BumpNotInsideZone):
            entropy_defect(res.sigma, zone, (1.0, 0.0), (0.9, 0.9), 0.3)


class TestLipschitz:
    def test_constant_field(self):
        mesh = triangulate(unit_square(), 1 / 16)
        res = constant_field_result(mesh, (1.0, 0.0))
        zone = extract_plastic_zone(res, 0.02)
        rep = check_lipschitz(res.sigma, zone, 0.15, 2000)
        assert rep.passed and rep.value == 0.0

    def test_vortex(self):
        apex = (0.5, -0.5)
        fan = FanOracle(apex, +1, MonotoneTable([(0.0, 0.0), (3.2, 3.2)]))
        dom = unit_square()
        mesh = triangulate(dom, 1 / 32)
        res = oracle_fields_on_mesh(fan, mesh, domain=dom)
        zone = extract_plastic_zone(res, 0.02)
        rep = check_lipschitz(res.sigma, zone, 0.15, 10000)
        assert rep.passed


class TestNonIntersection:
    def test_vortex_oracle(self, fan_sector_fields):
        # exact fields: traced rays concur exactly at the apex outside the zone
        mesh, dom, fan, res = fan_sector_fields
        zone = extract_plastic_zone(res, 0.02)
        sig = lambda pt: fan_eval(fan, pt)[0]
        uu = lambda pt: fan_eval(fan, pt)[1]
        lines = seed_and_trace(zone, sig, uu, 0.06, step=mesh.h / 2)
        rep = check_non_intersection(lines, zone, 2 * mesh.h)
        assert rep.passed

    def test_family_oracle(self, family_fields):
        mesh, dom, orc, res = family_fields
        zone = extract_plastic_zone(res, 0.02)
        sig = lambda pt: family453_eval(orc, pt)[0]
        uu = lambda pt: family453_eval(orc, pt)[1]
        lines = seed_and_trace(zone, sig, uu, 0.05, step=mesh.h / 2)
        rep = check_non_intersection(lines, zone, 2 * mesh.h)
        assert rep.passed


class TestFanTraceAgreement:
    def test_fan_oracle_matches_boundary_data(self, fan_sector_fields):
        mesh, dom, fan, res = fan_sector_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.06, step=mesh.h / 2)
        fans = detect_fans(lines, zone, 5 * mesh.h)
        assert len(fans) == 1
        rep = check_fan_trace_agreement(res, fans[0])
        # u is 1-Lipschitz in the angle; boundary data interpolates it per edge
        assert rep.value <= 2 * mesh.h * (1.0 / (3 * mesh.h)) + 0.05

    def test_vacuous_without_members(self, trapezoid_oracle_fields):
        mesh, dom, res = trapezoid_oracle_fields
        from henckyflow.analysis import Fan

        empty = Fan(apex=np.zeros(2), alpha=1, angular_span=(0.0, 1.0),
                    kind="boundary", member_lines=[], members=[])
        rep = check_fan_trace_agreement(res, empty)
        assert rep.passed


class TestSigmaConstancyReport:
    def test_oracle_lines(self, trapezoid_oracle_fields):
        mesh, dom, res = trapezoid_oracle_fields
        zone = extract_plastic_zone(res, 0.02)
        lines = seed_and_trace(zone, res.sigma, res.u, 0.1, step=mesh.h / 2)
        rep = check_sigma_constancy(lines, tol=1e-9)
        assert rep.passed  # constant oracle stress: zero deviation
