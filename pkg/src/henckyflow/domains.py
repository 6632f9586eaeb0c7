"""Ready-made domains used across tests, demos and the command line.

These cover the geometries the closed-form solution families live on: the
unit square with affine data, the mixed-condition trapezoid driving a uniform
diagonal stress, and convex sector polygons for vortex fields.
"""

from __future__ import annotations

import math

import numpy as np

from .mesh import BoundarySegment, Dirichlet, Domain, Neumann

SQRT2 = math.sqrt(2.0)


def unit_square(w_affine=(0.0, 0.5, 0.0)):
    """Unit square, full Dirichlet with an affine datum (a, b, c)."""
    a, b, c = w_affine
    v = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    cond = Dirichlet(a, b, c)
    segs = [BoundarySegment(v[i], v[(i + 1) % 4], cond) for i in range(4)]
    return Domain(np.array(v), tuple(segs))


def square(lo, hi, w_affine=(0.0, 0.0, 0.0)):
    """Axis-aligned square [lo,hi]^2, full Dirichlet affine datum."""
    a, b, c = w_affine
    v = [(lo, lo), (hi, lo), (hi, hi), (lo, hi)]
    cond = Dirichlet(a, b, c)
    segs = [BoundarySegment(v[i], v[(i + 1) % 4], cond) for i in range(4)]
    return Domain(np.array(v), tuple(segs))


def shear_trapezoid(d=1.0, ell=2.0, a=1.2):
    """Trapezoid {0 < x < d, 0 < y < ell - x} with mixed boundary data.

    Bottom edge: displacement x/sqrt(2).  Slanted top edge {x + y = ell}:
    displacement a*ell/sqrt(2) with a > 1.  Left and right vertical edges:
    normal loads -1/sqrt(2) and +1/sqrt(2).  These data drive the uniform
    diagonal stress (1,1)/sqrt(2) while leaving a one-parameter family of
    displacements in the upper region.
    """
    if not (0.0 < d < ell):
        raise ValueError("need 0 < d < ell")
    if a <= 1.0:
        raise ValueError("need a > 1")
    v = np.array([(0.0, 0.0), (d, 0.0), (d, ell - d), (0.0, ell)])
    segs = (
        BoundarySegment((0.0, 0.0), (d, 0.0), Dirichlet(0.0, 1.0 / SQRT2, 0.0)),
        BoundarySegment((d, 0.0), (d, ell - d), Neumann(1.0 / SQRT2)),
        BoundarySegment((d, ell - d), (0.0, ell), Dirichlet(a * ell / SQRT2)),
        BoundarySegment((0.0, ell), (0.0, 0.0), Neumann(-1.0 / SQRT2)),
    )
    return Domain(v, segs)


def vortex_sector(apex, r_inner, r_outer, theta0, theta1, u_of_angle, n_arc=None):
    """Convex polygon inscribed in a circular sector, apex cut off by a chord.

    The outer arc is sampled into short edges; each carries an affine
    Dirichlet datum interpolating ``u_of_angle`` at its endpoints, so a vortex
    displacement that depends only on the angle is matched up to the chord
    error of each edge.  The two radial edges carry exact (constant) data.

    Parameters
    ----------
    apex : pair of float
        Vortex center; must be outside the polygon (the chord cuts it off).
    r_inner, r_outer : float
        Chord distance scale and arc radius, 0 < r_inner < r_outer.
    theta0, theta1 : float
        Angular span in radians, theta0 < theta1, span < pi.
    u_of_angle : callable
        Displacement as a function of the angle.
    """
    if not (0.0 < r_inner < r_outer):
        raise ValueError("need 0 < r_inner < r_outer")
    if not (theta0 < theta1 < theta0 + math.pi):
        raise ValueError("need theta0 < theta1 < theta0 + pi")
    apex = np.asarray(apex, dtype=float)
    if n_arc is None:
        n_arc = max(4, int(np.ceil((theta1 - theta0) / 0.12)))
    thetas = np.linspace(theta0, theta1, n_arc + 1)

    def on_circle(r, th):
        return apex + r * np.array([math.cos(th), math.sin(th)])

    verts = [on_circle(r_inner, theta0)]
    verts += [on_circle(r_outer, th) for th in thetas]
    verts += [on_circle(r_inner, theta1)]
    verts = np.array(verts)

    def affine_through(p0, v0, p1, v1):
        """Affine plane function matching v0 at p0 and v1 at p1 (flat across)."""
        e = p1 - p0
        L2 = float(e @ e)
        grad = (v1 - v0) * e / L2
        return Dirichlet(float(v0 - grad @ p0), float(grad[0]), float(grad[1]))

    def angle_of(p):
        d = p - apex
        return math.atan2(d[1], d[0])

    segs = []
    n = len(verts)
    for i in range(n):
        p0, p1 = verts[i], verts[(i + 1) % n]
        v0 = float(u_of_angle(angle_of(p0)))
        v1 = float(u_of_angle(angle_of(p1)))
        segs.append(BoundarySegment(tuple(p0), tuple(p1), affine_through(p0, v0, p1, v1)))
    return Domain(verts, tuple(segs))
