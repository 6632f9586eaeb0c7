"""Command-line pipelines: solve, analyze, oracle, verify.

One declarative JSON config drives each pipeline; flags only override scalar
values.  Exit codes: 0 success, 1 usage/config error, 2 convergence failure
(artifacts still written), 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import analysis, reports
from .domains import shear_trapezoid, vortex_sector
from .mesh import (
    BoundarySegment,
    DegeneratePolygon,
    Dirichlet,
    Domain,
    Mesh,
    Neumann,
    NonConvexDomain,
    ResolutionTooCoarse,
    triangulate,
)
from .oracles import (
    CoverageError,
    Family453Oracle,
    FanOracle,
    HermiteTable,
    MonotoneTable,
    TrapezoidOracle,
    fan_eval,
    family453_eval,
    oracle_fields_on_mesh,
    step_z_profile,
    trapezoid_eval,
)
from .solver import NotConverged, SolverConfig, minimize


class ConfigError(ValueError):
    pass


DEFAULT_ANALYSIS = {
    "delta": 0.02,
    "spacing": 0.06,
    "step": None,  # defaults to h/2
    "n_pairs": 10000,
    "margin": 0.15,
    "cluster_radius": None,  # defaults to 5h
    "seed": 0,
}


def load_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"config parse error at line {e.lineno}, column {e.colno}: {e.msg}"
        )


def domain_from_config(cfg):
    try:
        verts = np.asarray(cfg["vertices"], dtype=float)
        segs = []
        for s in cfg["segments"]:
            kind = s["kind"].lower()
            if kind == "dirichlet":
                a, b, c = (list(s["affine"]) + [0.0, 0.0])[:3]
                cond = Dirichlet(float(a), float(b), float(c))
            elif kind == "neumann":
                cond = Neumann(float(s["g"]))
            else:
                raise ConfigError(f"unknown segment kind {s['kind']!r}")
            segs.append(BoundarySegment(tuple(s["start"]), tuple(s["end"]), cond))
        return Domain(verts, tuple(segs))
    except KeyError as e:
        raise ConfigError(f"domain config missing key {e}")
    except (NonConvexDomain, DegeneratePolygon) as e:
        raise ConfigError(str(e))


def solver_config_from(cfg):
    cfg = dict(cfg or {})
    kwargs = {}
    if "eps_schedule" in cfg:
        kwargs["eps_schedule"] = tuple(cfg.pop("eps_schedule"))
    for key in ("max_iters_per_eps", "grad_tol", "energy_tol", "boundary_huber"):
        if key in cfg:
            kwargs[key] = cfg.pop(key)
    if cfg:
        raise ConfigError(f"unknown solver config keys: {sorted(cfg)}")
    try:
        return SolverConfig(**kwargs)
    except ValueError as e:
        raise ConfigError(str(e))


def analysis_params_from(cfg, h):
    out = dict(DEFAULT_ANALYSIS)
    for key, val in (cfg or {}).items():
        if key not in DEFAULT_ANALYSIS:
            raise ConfigError(f"unknown analysis config key {key!r}")
        out[key] = val
    if out["step"] is None:
        out["step"] = h / 2.0
    if out["cluster_radius"] is None:
        out["cluster_radius"] = 5.0 * h
    for key in ("delta", "spacing", "step", "margin", "cluster_radius"):
        if out[key] <= 0:
            raise ConfigError(f"analysis parameter {key!r} must be positive")
    return out


def _echo_config(cfg, h, out_dir, reproducible=False):
    echo = dict(cfg)
    echo["h"] = h
    # keep byte-identical reports across runs into different directories
    echo["output_dir"] = "." if reproducible else out_dir
    return echo


def _write_field_artifacts(out_dir, mesh, result):
    reports.write_tri_fields(
        os.path.join(out_dir, "fields_tri.csv"), mesh, result.sigma, result.p, result.p_norm
    )
    reports.write_node_fields(os.path.join(out_dir, "fields_node.csv"), mesh, result.u)
    reports.write_energy_history(
        os.path.join(out_dir, "energy_history.csv"), result.energy_history
    )
    reports.atomic_write(os.path.join(out_dir, "mesh.txt"), mesh.dump())


def cmd_solve(config_path, out=None, h_override=None, dump_mesh=None, reproducible=False):
    cfg = load_json(config_path)
    domain = domain_from_config(cfg.get("domain", {}))
    h = float(h_override if h_override is not None else cfg.get("h", 1 / 32))
    out_dir = out or cfg.get("output_dir", "out")
    scfg = solver_config_from(cfg.get("solver"))
    try:
        mesh = triangulate(domain, h)
    except (ResolutionTooCoarse, DegeneratePolygon, NonConvexDomain) as e:
        raise ConfigError(str(e))

    converged = True
    try:
        result = minimize(mesh, domain, scfg)
    except NotConverged as e:
        result = e.result
        converged = False

    _write_field_artifacts(out_dir, mesh, result)
    if dump_mesh:
        reports.atomic_write(dump_mesh, mesh.dump())
    report = {
        "kind": "solve",
        "h": h,
        "n_nodes": mesh.n_nodes,
        "n_triangles": mesh.n_triangles,
        "div_residual": result.div_residual,
        "eps_final": result.eps_final,
        "converged": converged,
        "stages": [
            {k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
             for k, v in rec.items()}
            for rec in result.stage_info
        ],
        "config": _echo_config(cfg, h, out_dir, reproducible),
    }
    reports.write_json(os.path.join(out_dir, "solve_report.json"), report)
    return 0 if converged else 2


def _load_fields(fields_dir):
    report_path = os.path.join(fields_dir, "solve_report.json")
    if not os.path.exists(report_path):
        raise ConfigError(f"no solve_report.json in {fields_dir}")
    with open(report_path) as f:
        report = json.load(f)
    mesh = Mesh.parse(
        open(os.path.join(fields_dir, "mesh.txt")).read(), float(report["h"])
    )
    sigma, p, p_norm = reports.read_tri_fields(os.path.join(fields_dir, "fields_tri.csv"))
    u = reports.read_node_fields(os.path.join(fields_dir, "fields_node.csv"))
    from .solver import SolveResult, divergence_residual

    result = SolveResult(
        u=u, sigma=sigma, p=p, p_norm=p_norm, energy_history=[],
        div_residual=float(report.get("div_residual", divergence_residual(mesh, sigma))),
        eps_final=float(report.get("eps_final", 0.0)), stage_sigmas=[sigma],
        mesh=mesh, domain=None, converged=bool(report.get("converged", True)),
    )
    return mesh, result, report


def _run_diagnostics(mesh, domain, result, params):
    """Full diagnostic suite; returns (records, lines, zone, decomposition)."""
    result.domain = domain
    records = []
    try:
        zone = analysis.extract_plastic_zone(result, params["delta"])
    except analysis.EmptyZone:
        records.append(
            {"name": "plastic_zone", "params": {"delta": params["delta"]},
             "value": 0.0, "threshold": 0.0, "pass": True, "note": "empty zone"}
        )
        return records, [], None, None

    lines = analysis.seed_and_trace(
        zone, result.sigma, result.u, params["spacing"], step=params["step"]
    )
    records.append(
        {"name": "traced_lines", "params": {"spacing": params["spacing"]},
         "value": float(len(lines)), "threshold": 1.0, "pass": len(lines) >= 1}
    )
    checks = []
    if lines:
        checks.append(analysis.check_sigma_constancy(lines, tol=0.05))
        checks.append(analysis.check_u_constancy(lines))
        checks.append(analysis.check_non_intersection(lines, zone, 2 * mesh.h))
    checks.append(
        analysis.check_ordering(
            result.sigma, zone, params["n_pairs"], 0.02, seed=params["seed"]
        )
    )
    try:
        checks.append(
            analysis.check_lipschitz(
                result.sigma, zone, params["margin"], params["n_pairs"],
                seed=params["seed"],
            )
        )
    except analysis.EmptyInterior:
        records.append(
            {"name": "lipschitz", "params": {"margin": params["margin"]},
             "value": None, "threshold": None, "pass": True, "note": "margin interior empty"}
        )

    dec = analysis.classify(
        zone, result.sigma, lines, cluster_radius=params["cluster_radius"]
    )
    for fan in dec.fans:
        try:
            checks.append(analysis.check_fan_trace_agreement(result, fan))
        except (analysis.NoDirichletIntersection, ValueError) as e:
            records.append(
                {"name": "fan_trace_agreement", "params": {}, "value": None,
                 "threshold": None, "pass": True, "note": str(e)}
            )

    # entropy defect at the most interior point, when a bump fits
    centroids = mesh.centroids[zone.triangle_mask]
    d_out = zone.distance_to_outline(centroids)
    best = int(np.argmax(d_out))
    radius = min(0.8 * float(d_out[best]), 0.2)
    if radius >= 4 * mesh.h:
        center = centroids[best]
        worst = 0.0
        for k in range(8):
            th = 2 * math.pi * k / 8
            worst = max(
                worst,
                abs(
                    analysis.entropy_defect(
                        result.sigma, zone, (math.cos(th), math.sin(th)), center, radius
                    )
                ),
            )
        records.append(
            {"name": "entropy_defect",
             "params": {"radius": radius, "center": [float(center[0]), float(center[1])],
                        "n_directions": 8},
             "value": worst, "threshold": 2 * mesh.h, "pass": worst <= 2 * mesh.h}
        )
    else:
        records.append(
            {"name": "entropy_defect", "params": {}, "value": None, "threshold": None,
             "pass": True, "note": "no bump fits inside the zone"}
        )

    for c in checks:
        rec = c.to_record()
        if c.name == "non_intersection":
            # solver fields tolerate up to 1% of intersecting pairs
            frac = c.details.get("violation_fraction", 0.0)
            rec["value"] = frac
            rec["threshold"] = 0.01
            rec["pass"] = frac <= 0.01
        records.append(rec)
    return records, lines, zone, dec


def cmd_analyze(fields_dir, config_path, delta=None, reproducible=False):
    cfg = load_json(config_path)
    mesh, result, report = _load_fields(fields_dir)
    domain = domain_from_config(cfg.get("domain", {}))
    params = analysis_params_from(cfg.get("analysis"), mesh.h)
    if delta is not None:
        params["delta"] = float(delta)

    records, lines, zone, dec = _run_diagnostics(mesh, domain, result, params)
    reports.write_json(os.path.join(fields_dir, "diagnostics.json"), records)
    reports.write_characteristics_csv(
        os.path.join(fields_dir, "characteristics.csv"), lines
    )
    svg = reports.characteristics_svg(
        domain, zone, lines, dec.fans if dec else [], reproducible=reproducible
    )
    reports.atomic_write(os.path.join(fields_dir, "characteristics.svg"), svg)
    if dec is not None:
        reports.write_json(
            os.path.join(fields_dir, "decomposition.json"),
            reports.decomposition_record(dec, mesh),
        )
    else:
        reports.write_json(
            os.path.join(fields_dir, "decomposition.json"),
            {"fans": [], "constant_zones": [], "other_components": [], "n_lines": 0,
             "unclassified_area_fraction": 0.0},
        )
    return 0


def oracle_from_config(cfg):
    kind = cfg.get("type")
    if kind == "trapezoid":
        d, ell, a = float(cfg["d"]), float(cfg["ell"]), float(cfg["a"])
        table = cfg.get("table")
        prof = MonotoneTable(table) if table else step_z_profile(d, ell, a)
        oracle = TrapezoidOracle(d, ell, a, prof)
        domain = shear_trapezoid(d, ell, a)
        return oracle, domain
    if kind == "fan":
        apex = tuple(cfg["apex"])
        alpha = int(cfg.get("alpha", 1))
        table = cfg["table"]
        prof = MonotoneTable(table)
        oracle = FanOracle(apex, alpha, prof)
        r_in = float(cfg.get("r_inner", 0.05))
        r_out = float(cfg.get("r_outer", 1.0))
        th0 = prof.t_min + 0.02 * (prof.t_max - prof.t_min)
        th1 = prof.t_max - 0.02 * (prof.t_max - prof.t_min)
        domain = vortex_sector(
            apex, r_in, r_out, th0, th1, lambda th: alpha * prof(th)
        )
        return oracle, domain
    if kind == "family453":
        R = float(cfg.get("R", 1.0))
        if "table" in cfg:
            t = [row[0] for row in cfg["table"]]
            v = [row[1] for row in cfg["table"]]
            if "derivs" in cfg:
                prof = HermiteTable(t, v, cfg["derivs"])
            else:
                prof = HermiteTable.from_values(t, v)
            oracle = Family453Oracle(R, prof)
        else:
            oracle = Family453Oracle(R)
        lo = float(cfg.get("lo", 0.2 * R))
        hi = float(cfg.get("hi", 0.8 * R))
        from .domains import square

        domain = square(lo, hi)
        return oracle, domain
    raise ConfigError(f"unknown oracle type {kind!r}")


def cmd_oracle(oracle_path, h, out, reproducible=False, dump_mesh=None):
    cfg = load_json(oracle_path)
    oracle, domain = oracle_from_config(cfg)
    try:
        mesh = triangulate(domain, float(h))
    except (ResolutionTooCoarse, DegeneratePolygon, NonConvexDomain) as e:
        raise ConfigError(str(e))
    try:
        result = oracle_fields_on_mesh(oracle, mesh, domain=domain)
    except CoverageError as e:
        raise ConfigError(str(e))
    _write_field_artifacts(out, mesh, result)
    if dump_mesh:
        reports.atomic_write(dump_mesh, mesh.dump())
    report = {
        "kind": "oracle",
        "h": float(h),
        "n_nodes": mesh.n_nodes,
        "n_triangles": mesh.n_triangles,
        "div_residual": result.div_residual,
        "eps_final": 0.0,
        "converged": True,
        "config": {"oracle": cfg, "h": float(h),
                   "output_dir": "." if reproducible else out},
    }
    reports.write_json(os.path.join(out, "solve_report.json"), report)
    truth = {"oracle": cfg}
    if cfg.get("type") == "fan":
        truth["apex"] = list(map(float, cfg["apex"]))
        truth["alpha"] = int(cfg.get("alpha", 1))
    if cfg.get("type") == "trapezoid":
        truth["sigma_bar"] = [1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)]
    reports.write_json(os.path.join(out, "oracle_truth.json"), truth)
    return 0


def _truth_sigma_at(truth_cfg, pts):
    oracle, _ = oracle_from_config(truth_cfg["oracle"])
    if isinstance(oracle, TrapezoidOracle):
        return trapezoid_eval(oracle, pts)[0]
    if isinstance(oracle, FanOracle):
        return fan_eval(oracle, pts)[0]
    return family453_eval(oracle, pts)[0]


def cmd_verify(fields_dir, truth_path=None, reproducible=False):
    mesh, result, report = _load_fields(fields_dir)
    cfg = report.get("config", {})
    domain = None
    if "domain" in cfg:
        domain = domain_from_config(cfg["domain"])
    elif cfg.get("oracle") is not None:
        _, domain = oracle_from_config(cfg["oracle"])
    params = analysis_params_from(cfg.get("analysis"), mesh.h)

    records, lines, zone, dec = _run_diagnostics(mesh, domain, result, params)

    if truth_path is not None:
        truth_cfg = load_json(truth_path)
        sig_true = _truth_sigma_at(truth_cfg, mesh.centroids)
        w = mesh.areas[:, None]
        num = float(np.sum(w * (result.sigma - sig_true) ** 2))
        den = float(np.sum(w * sig_true**2))
        err = math.sqrt(num / max(den, 1e-300))
        records.append(
            {"name": "stress_error_vs_truth", "params": {"truth": truth_path},
             "value": err, "threshold": 0.03, "pass": err <= 0.03}
        )

    reports.write_json(os.path.join(fields_dir, "diagnostics.json"), records)
    all_pass = all(r["pass"] for r in records)
    name_w = max(len(r["name"]) for r in records)
    print(f"{'check'.ljust(name_w)}  {'value':>12}  {'threshold':>12}  verdict")
    for r in records:
        val = "-" if r["value"] is None else f"{r['value']:.6g}"
        thr = "-" if r["threshold"] is None else f"{r['threshold']:.6g}"
        verdict = "pass" if r["pass"] else "FAIL"
        print(f"{r['name'].ljust(name_w)}  {val:>12}  {thr:>12}  {verdict}")
    return 0 if all_pass else 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="henckyflow", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="mesh a domain and minimize the functional")
    ps.add_argument("config")
    ps.add_argument("--out", default=None)
    ps.add_argument("--h", type=float, default=None)
    ps.add_argument("--dump-mesh", default=None)
    ps.add_argument("--reproducible", action="store_true")

    pa = sub.add_parser("analyze", help="run the characteristic-flow analysis")
    pa.add_argument("fields_dir")
    pa.add_argument("config")
    pa.add_argument("--delta", type=float, default=None)
    pa.add_argument("--reproducible", action="store_true")

    po = sub.add_parser("oracle", help="evaluate a closed-form oracle onto a mesh")
    po.add_argument("oracle_config")
    po.add_argument("--h", type=float, required=True)
    po.add_argument("--out", required=True)
    po.add_argument("--reproducible", action="store_true")
    po.add_argument("--dump-mesh", default=None)

    pv = sub.add_parser("verify", help="run the diagnostic suite on stored fields")
    pv.add_argument("fields_dir")
    pv.add_argument("--truth", default=None)
    pv.add_argument("--reproducible", action="store_true")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            return cmd_solve(args.config, out=args.out, h_override=args.h,
                             dump_mesh=args.dump_mesh,
                             reproducible=args.reproducible)
        if args.command == "analyze":
            return cmd_analyze(args.fields_dir, args.config, delta=args.delta,
                               reproducible=args.reproducible)
        if args.command == "oracle":
            return cmd_oracle(args.oracle_config, args.h, args.out,
                              reproducible=args.reproducible, dump_mesh=args.dump_mesh)
        if args.command == "verify":
            return cmd_verify(args.fields_dir, truth_path=args.truth,
                              reproducible=args.reproducible)
        return 1
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
