"""Artifact writers: CSV field dumps, JSON reports, SVG figures.

All numeric output uses 17 significant digits so artifacts round-trip through
text exactly; every file is written atomically (temp file + rename) and all
content is deterministic for identical inputs.  The SVG carries a timestamp
comment unless suppressed for reproducible runs.
"""

from __future__ import annotations

import datetime
import json
import os
import tempfile

import numpy as np


def fmt(x):
    """17-significant-digit decimal rendering of a float."""
    return f"{float(x):.17g}"


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_tri_fields(path, mesh, sigma, p, p_norm):
    rows = ["tri_id,cx,cy,sigma_x,sigma_y,p_x,p_y,p_norm"]
    c = mesh.centroids
    for t in range(mesh.n_triangles):
        rows.append(
            ",".join(
                [str(t), fmt(c[t, 0]), fmt(c[t, 1]), fmt(sigma[t, 0]), fmt(sigma[t, 1]),
                 fmt(p[t, 0]), fmt(p[t, 1]), fmt(p_norm[t])]
            )
        )
    atomic_write(path, "\n".join(rows) + "\n")


def write_node_fields(path, mesh, u):
    rows = ["node_id,x,y,u"]
    for n in range(mesh.n_nodes):
        rows.append(
            ",".join([str(n), fmt(mesh.nodes[n, 0]), fmt(mesh.nodes[n, 1]), fmt(u[n])])
        )
    atomic_write(path, "\n".join(rows) + "\n")


def read_tri_fields(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    data = np.atleast_2d(data)
    return data[:, 3:5], data[:, 5:7], data[:, 7]


def read_node_fields(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    data = np.atleast_2d(data)
    return data[:, 3]


def write_energy_history(path, history):
    rows = ["eps,iteration,energy"]
    for eps, it, e in history:
        rows.append(f"{fmt(eps)},{it},{fmt(e)}")
    atomic_write(path, "\n".join(rows) + "\n")


def write_characteristics_csv(path, lines):
    rows = ["line_id,x0,y0,x1,y1,sigma_x,sigma_y,u_mean,u_dev"]
    for k, ln in enumerate(lines):
        sig = ln.sigma_samples[len(ln.sigma_samples) // 2]
        rows.append(
            ",".join(
                [str(k), fmt(ln.endpoints[0, 0]), fmt(ln.endpoints[0, 1]),
                 fmt(ln.endpoints[1, 0]), fmt(ln.endpoints[1, 1]),
                 fmt(sig[0]), fmt(sig[1]),
                 fmt(float(np.mean(ln.u_samples))), fmt(ln.u_deviation)]
            )
        )
    atomic_write(path, "\n".join(rows) + "\n")


def characteristics_svg(domain, zone, lines, fans, reproducible=False, size=640):
    """Figure: domain outline, shaded plastic zone, characteristic lines,
    fan apexes as markers."""
    v = domain.vertices
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    span = float(max(hi - lo))
    pad = 0.05 * span
    lo = lo - pad
    width = span + 2 * pad

    def sx(x):
        return (x - lo[0]) / width * size

    def sy(y):
        return size - (y - lo[1]) / width * size

    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    if not reproducible:
        stamp = datetime.datetime.now().isoformat(timespec="seconds")
        out.append(f"<!-- generated {stamp} -->")
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    )
    if zone is not None:
        mesh = zone.mesh
        tris = np.nonzero(zone.triangle_mask)[0]
        pts_cache = []
        for t in tris:
            p = mesh.nodes[mesh.triangles[t]]
            pts_cache.append(
                " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in p)
            )
        out.append('<g fill="#d9d9d9" stroke="none">')
        for s in pts_cache:
            out.append(f'<polygon points="{s}"/>')
        out.append("</g>")
    poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in v)
    out.append(
        f'<polygon points="{poly}" fill="none" stroke="#000000" stroke-width="1.5"/>'
    )
    out.append('<g stroke="#1f5fbf" stroke-width="1">')
    for ln in lines:
        (x0, y0), (x1, y1) = ln.endpoints
        out.append(
            f'<line x1="{sx(x0):.2f}" y1="{sy(y0):.2f}" '
            f'x2="{sx(x1):.2f}" y2="{sy(y1):.2f}"/>'
        )
    out.append("</g>")
    for fan in fans:
        out.append(
            f'<circle cx="{sx(fan.apex[0]):.2f}" cy="{sy(fan.apex[1]):.2f}" r="4" '
            f'fill="#c62828"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def decomposition_record(dec, mesh):
    fans = [
        {
            "apex": [float(f.apex[0]), float(f.apex[1])],
            "alpha": int(f.alpha),
            "angular_span": [float(f.angular_span[0]), float(f.angular_span[1])],
            "kind": f.kind,
            "n_member_lines": len(f.member_lines),
            "vortex_error": float(f.vortex_error),
        }
        for f in dec.fans
    ]
    constants = [
        {
            "sigma_bar": [float(s[0]), float(s[1])],
            "n_triangles": int(len(tris)),
            "area": float(np.sum(mesh.areas[tris])),
        }
        for s, tris in dec.constant_zones
    ]
    others = [
        {"n_triangles": int(len(tris)), "area": float(np.sum(mesh.areas[tris]))}
        for tris in dec.other_components
    ]
    return {
        "fans": fans,
        "constant_zones": constants,
        "other_components": others,
        "n_lines": len(dec.lines),
        "unclassified_area_fraction": float(dec.unclassified_area_fraction),
    }
