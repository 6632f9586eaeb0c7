"""Convex polygonal domains with mixed boundary data, and their triangulations.

A :class:`Domain` is a simple convex polygon whose boundary is partitioned
into segments, each carrying either an affine Dirichlet datum
``w = a + b*x1 + c*x2`` or a constant Neumann datum ``g`` (the normal stress).

:func:`triangulate` builds a conforming P1 mesh: boundary nodes subdivide each
segment at spacing <= h, interior nodes are a lightly perturbed h-lattice
clipped to the polygon, and the connectivity is the Delaunay triangulation of
the union after a few Laplacian smoothing rounds of the interior.  The result
is deterministic for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay, cKDTree

_GEOM_TOL = 1e-9
_LATTICE_SEED = 160451  # fixed: triangulate must be reproducible


class NonConvexDomain(ValueError):
    """Polygon is not convex (or not counter-clockwise)."""


class DegeneratePolygon(ValueError):
    """Polygon or its boundary partition is malformed."""


class ResolutionTooCoarse(ValueError):
    """Requested h leaves too few interior nodes (or exceeds half the diameter)."""


class PointNotOnBoundary(ValueError):
    """Queried point is not on the polygon boundary."""


@dataclass(frozen=True)
class Dirichlet:
    """Affine boundary displacement ``w(x) = a + b*x1 + c*x2``."""

    a: float
    b: float = 0.0
    c: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.a + self.b * x[..., 0] + self.c * x[..., 1]


@dataclass(frozen=True)
class Neumann:
    """Constant normal load ``sigma . nu = g`` on the segment."""

    g: float


@dataclass(frozen=True)
class BoundarySegment:
    start: tuple
    end: tuple
    condition: Dirichlet | Neumann

    def __post_init__(self):
        s = np.asarray(self.start, dtype=float)
        e = np.asarray(self.end, dtype=float)
        if np.linalg.norm(e - s) <= _GEOM_TOL:
            raise DegeneratePolygon("boundary segment with coincident endpoints")

    @property
    def is_dirichlet(self):
        return isinstance(self.condition, Dirichlet)

    def length(self):
        return float(
            np.linalg.norm(np.asarray(self.end, float) - np.asarray(self.start, float))
        )


def _polygon_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _point_segment_distance(pts, a, b):
    """Distance from points (n,2) to the closed segment [a, b]."""
    pts = np.atleast_2d(pts)
    d = b - a
    L2 = float(d @ d)
    t = np.clip((pts - a) @ d / L2, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.linalg.norm(pts - proj, axis=1), t


@dataclass(frozen=True)
class Domain:
    """Simple convex polygon (CCW vertices) with a full boundary partition."""

    vertices: np.ndarray
    segments: tuple

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "segments", tuple(self.segments))
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise DegeneratePolygon("need at least three 2-d vertices")
        n = v.shape[0]
        crosses = []
        for i in range(n):
            e1 = v[(i + 1) % n] - v[i]
            e2 = v[(i + 2) % n] - v[(i + 1) % n]
            crosses.append(float(e1[0] * e2[1] - e1[1] * e2[0]))
        scale = self.diameter() ** 2
        if any(c < -_GEOM_TOL * scale for c in crosses):
            raise NonConvexDomain("vertices must run counter-clockwise around a convex polygon")
        if sum(c > _GEOM_TOL * scale for c in crosses) < 3:
            raise DegeneratePolygon("polygon is (nearly) degenerate")
        if not any(s.is_dirichlet for s in self.segments):
            raise DegeneratePolygon("at least one Dirichlet segment required")
        self._check_partition()

    # -- geometry ---------------------------------------------------------

    def area(self):
        return _polygon_area(self.vertices)

    def perimeter(self):
        v = self.vertices
        return float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))

    def diameter(self):
        v = np.asarray(self.vertices, dtype=float)
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d * d).sum(axis=2).max()))

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def boundary_distance(self, pts):
        """Unsigned distance from points (n,2) to the polygon boundary."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        best = np.full(len(pts), np.inf)
        for a, b in self.edges():
            d, _ = _point_segment_distance(pts, a, b)
            best = np.minimum(best, d)
        return best

    def contains(self, pts, tol=0.0):
        """Inside test (CCW half-plane intersection); tol > 0 shrinks the set."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = np.ones(len(pts), dtype=bool)
        for a, b in self.edges():
            e = b - a
            nrm = np.linalg.norm(e)
            r = pts - a
            ok &= (e[0] * r[:, 1] - e[1] * r[:, 0]) / nrm >= tol
        return ok

    # -- boundary partition -----------------------------------------------

    def _arclength_of(self, pt):
        """Cumulative CCW arclength of a boundary point; raises if off-boundary."""
        pt = np.asarray(pt, dtype=float)
        s = 0.0
        tol = _GEOM_TOL * max(1.0, self.diameter())
        for a, b in self.edges():
            d, t = _point_segment_distance(pt[None, :], a, b)
            if d[0] <= tol:
                return s + float(t[0]) * float(np.linalg.norm(b - a))
            s += float(np.linalg.norm(b - a))
        raise PointNotOnBoundary(f"point {pt.tolist()} is not on the polygon boundary")

    def _check_partition(self):
        per = self.perimeter()
        tol = _GEOM_TOL * max(1.0, per)
        intervals = []
        for seg in self.segments:
            s0 = self._arclength_of(seg.start)
            s1 = self._arclength_of(seg.end)
            mid = 0.5 * (np.asarray(seg.start, float) + np.asarray(seg.end, float))
            self._arclength_of(mid)  # segment must lie along the boundary
            if s1 <= s0 + tol:
                s1 += per
            intervals.append((s0, s1))
        intervals.sort()
        total = sum(b - a for a, b in intervals)
        if abs(total - per) > 1e-6 * per:
            raise DegeneratePolygon("boundary segments must partition the boundary exactly once")
        for (a0, b0), (a1, b1) in zip(intervals, intervals[1:] + [(intervals[0][0] + per,) * 2]):
            if abs(b0 - a1) > 1e-6 * per:
                raise DegeneratePolygon("boundary segments leave a gap or overlap")

    def segment_at(self, pt):
        """Index of the segment containing a boundary point.

        At a junction the segment whose interior is nearest wins; exact ties
        go to the lower segment id.
        """
        pt = np.asarray(pt, dtype=float)
        tol = _GEOM_TOL * max(1.0, self.diameter())
        if self.boundary_distance(pt[None, :])[0] > tol:
            raise PointNotOnBoundary(f"point {pt.tolist()} is not on the polygon boundary")
        best_id, best_d = None, np.inf
        for k, seg in enumerate(self.segments):
            a = np.asarray(seg.start, float)
            b = np.asarray(seg.end, float)
            d, t = _point_segment_distance(pt[None, :], a, b)
            if d[0] > tol:
                continue
            # distance to the segment *interior*: penalize sitting at an endpoint
            L = float(np.linalg.norm(b - a))
            edge_gap = min(t[0], 1.0 - t[0]) * L
            interior_d = d[0] + max(0.0, tol - edge_gap)
            if interior_d < best_d - 1e-15:
                best_id, best_d = k, interior_d
        if best_id is None:
            raise PointNotOnBoundary(f"point {pt.tolist()} matches no boundary segment")
        return best_id


def boundary_value(domain, x):
    """Dirichlet datum at a boundary point, or None on a Neumann segment."""
    k = domain.segment_at(x)
    cond = domain.segments[k].condition
    if isinstance(cond, Dirichlet):
        return float(cond(np.asarray(x, dtype=float)))
    return None


# ---------------------------------------------------------------------------
# triangulation
# ---------------------------------------------------------------------------


@dataclass
class Mesh:
    """Conforming P1 triangle mesh of a domain.

    ``boundary_edges`` holds ``(i, j, segment_id)`` node-index pairs in CCW
    order along the boundary.  Geometric caches (areas, P1 gradients,
    centroids) are computed once at construction.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: list
    h: float
    areas: np.ndarray = field(init=False)
    grads: np.ndarray = field(init=False)
    centroids: np.ndarray = field(init=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        self.areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        if np.any(self.areas <= 0.0):
            raise DegeneratePolygon("mesh contains non-positive triangle areas")
        # grads[t, i] = gradient of the P1 hat of local node i on triangle t
        g = np.empty((len(self.triangles), 3, 2))
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            g[:, i, 0] = p[:, j, 1] - p[:, k, 1]
            g[:, i, 1] = p[:, k, 0] - p[:, j, 0]
        self.grads = g / (2.0 * self.areas)[:, None, None]
        self.centroids = p.mean(axis=1)
        self._point_index = None

    # -- derived info -------------------------------------------------------

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def boundary_node_mask(self):
        mask = np.zeros(self.n_nodes, dtype=bool)
        for i, j, _ in self.boundary_edges:
            mask[i] = mask[j] = True
        return mask

    def gradient(self, u):
        """Per-triangle gradient of a nodal field, shape (T, 2)."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n_nodes,):
            raise ValueError(f"field has shape {u.shape}, expected ({self.n_nodes},)")
        return np.einsum("tid,ti->td", self.grads, u[self.triangles])

    def edge_lengths(self):
        p = self.nodes[self.triangles]
        out = []
        for i in range(3):
            out.append(np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1))
        return np.stack(out, axis=1)

    def min_angle_deg(self):
        ln = self.edge_lengths()
        a, b, c = ln[:, 0], ln[:, 1], ln[:, 2]
        angles = []
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            cosang = np.clip((y**2 + z**2 - x**2) / (2 * y * z), -1.0, 1.0)
            angles.append(np.arccos(cosang))
        return float(np.degrees(np.min(np.stack(angles))))

    # -- point location and interpolation ------------------------------------

    def _build_point_index(self):
        cell = 2.0 * self.h
        lo = self.nodes.min(axis=0)
        tri_cells = {}
        p = self.nodes[self.triangles]
        lo_idx = np.floor((p.min(axis=1) - lo) / cell).astype(int)
        hi_idx = np.floor((p.max(axis=1) - lo) / cell).astype(int)
        for t in range(self.n_triangles):
            for cx in range(lo_idx[t, 0], hi_idx[t, 0] + 1):
                for cy in range(lo_idx[t, 1], hi_idx[t, 1] + 1):
                    tri_cells.setdefault((cx, cy), []).append(t)
        self._point_index = (lo, cell, tri_cells)

    def find_triangle(self, pt, tol=1e-12):
        """Index of a triangle containing pt, or -1."""
        if self._point_index is None:
            self._build_point_index()
        lo, cell, tri_cells = self._point_index
        key = tuple(np.floor((np.asarray(pt, float) - lo) / cell).astype(int))
        for t in tri_cells.get(key, ()):
            if self._bary(pt, t, tol) is not None:
                return t
        return -1

    def _bary(self, pt, t, tol=1e-12):
        i, j, k = self.triangles[t]
        a, b, c = self.nodes[i], self.nodes[j], self.nodes[k]
        m = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
        try:
            lam = np.linalg.solve(m, np.asarray(pt, float) - a)
        except np.linalg.LinAlgError:
            return None
        l1, l2 = lam
        l0 = 1.0 - l1 - l2
        if l0 >= -tol and l1 >= -tol and l2 >= -tol:
            return np.array([l0, l1, l2])
        return None

    def interpolate(self, u, pt, t=None):
        """P1 interpolation of a nodal field at a point (optionally in a known triangle)."""
        if t is None or t < 0:
            t = self.find_triangle(pt, tol=1e-9)
        if t < 0:
            raise ValueError(f"point {np.asarray(pt).tolist()} outside the mesh")
        lam = self._bary(pt, t, tol=1e-6)
        if lam is None:
            t = self.find_triangle(pt, tol=1e-9)
            lam = self._bary(pt, t, tol=1e-6)
        return float(lam @ np.asarray(u)[self.triangles[t]])

    # -- serialization --------------------------------------------------------

    def dump(self):
        """Text dump: `N x y`, `T i j k`, `B i j seg` records (0-based)."""
        lines = []
        for x, y in self.nodes:
            lines.append(f"N {x:.17g} {y:.17g}")
        for i, j, k in self.triangles:
            lines.append(f"T {i} {j} {k}")
        for i, j, s in self.boundary_edges:
            lines.append(f"B {i} {j} {s}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text, h):
        nodes, tris, bedges = [], [], []
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            tag, rest = parts[0], parts[1:]
            if tag == "N":
                nodes.append([float(rest[0]), float(rest[1])])
            elif tag == "T":
                tris.append([int(v) for v in rest[:3]])
            elif tag == "B":
                bedges.append((int(rest[0]), int(rest[1]), int(rest[2])))
        return cls(np.array(nodes), np.array(tris), bedges, h)


def _boundary_chain(domain, h):
    """Nodes along the boundary at spacing <= h, with segment ids per edge.

    Returns (points (M,2), edge_seg (M,)) where edge k joins point k to
    point (k+1) % M and carries segment id edge_seg[k].
    """
    pts = []
    seg_of_edge = []
    for sid, seg in enumerate(domain.segments):
        a = np.asarray(seg.start, float)
        b = np.asarray(seg.end, float)
        n = max(1, math.ceil(seg.length() / h * (1.0 - 1e-12)))
        for i in range(n):
            t = i / n
            pts.append(a * (1 - t) + b * t)
            seg_of_edge.append(sid)
    return np.array(pts), np.array(seg_of_edge, dtype=int)


def triangulate(domain, h):
    """Triangulate a convex polygonal domain at target edge length h.

    Boundary nodes subdivide each segment exactly; interior nodes are a
    perturbed h-lattice kept clear of the boundary band; connectivity is
    Delaunay after Laplacian smoothing of the interior.
    """
    if h <= 0.0:
        raise ResolutionTooCoarse("h must be positive")
    if h >= 0.5 * domain.diameter():
        raise ResolutionTooCoarse("h must be below half the polygon diameter")

    if _axis_aligned_rectangle(domain):
        # exact structured grid: every interior stencil is a translate of the
        # same 6-triangle patch, which makes centroid quadratures of smooth
        # fields supraconvergent (needed by the refinement regressions)
        return _structured_rectangle_mesh(domain, h)

    bpts, edge_seg = _boundary_chain(domain, h)

    lo = domain.vertices.min(axis=0)
    hi = domain.vertices.max(axis=0)
    nx = int(np.floor((hi[0] - lo[0]) / h)) + 1
    ny = int(np.floor((hi[1] - lo[1]) / h)) + 1
    gx, gy = np.meshgrid(lo[0] + h * np.arange(nx), lo[1] + h * np.arange(ny))
    # deterministic micro-shear: breaks cocircular Delaunay ties uniformly
    gx = gx + 1e-6 * h * np.arange(ny)[:, None]
    lattice = np.column_stack([gx.ravel(), gy.ravel()])
    inside = domain.contains(lattice, tol=0.0)
    lattice = lattice[inside]
    if len(lattice) < 4:
        raise ResolutionTooCoarse(
            f"only {len(lattice)} lattice nodes inside the polygon at h={h}"
        )
    clear = domain.boundary_distance(lattice) >= 0.6 * h
    interior = lattice[clear]

    pts = np.vstack([bpts, interior])
    n_bnd = len(bpts)
    tri = Delaunay(pts)

    if not _good_quality(pts, tri, h):
        # irregular boundary band: relax it and fill stretched spots
        def band_smooth(pts, rounds):
            movable = np.zeros(len(pts), dtype=bool)
            movable[n_bnd:] = domain.boundary_distance(pts[n_bnd:]) < 2.5 * h
            tri = Delaunay(pts)
            for _ in range(rounds):
                pts = _smooth_interior(pts, tri, movable)
                tri = Delaunay(pts)
            return pts, tri

        pts, tri = band_smooth(pts, 4)
        for _ in range(4):
            fill = _long_edge_midpoints(pts, tri, domain, h)
            if len(fill) == 0:
                break
            pts = np.vstack([pts, fill])
            pts, tri = band_smooth(pts, 3)

    simplices = _oriented_simplices(pts, tri)
    # roundoff can park a chain node a hair inside the hull, leaving a
    # zero-area sliver against the true boundary edge; drop such slivers
    p = pts[simplices]
    area2 = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 1, 1] - p[:, 0, 1]
    ) * (p[:, 2, 0] - p[:, 0, 0])
    simplices = simplices[np.abs(area2) > 1e-12 * h * h]
    bedges = _boundary_edge_table(pts, simplices, n_bnd, edge_seg)
    mesh = Mesh(pts, simplices, bedges, float(h))
    if len(np.unique(simplices)) != len(pts):
        raise DegeneratePolygon("triangulation dropped input nodes")
    return mesh


def _axis_aligned_rectangle(domain):
    v = domain.vertices
    if len(v) != 4:
        return False
    for i in range(4):
        e = v[(i + 1) % 4] - v[i]
        if abs(e[0]) > _GEOM_TOL and abs(e[1]) > _GEOM_TOL:
            return False
    return True


def _structured_rectangle_mesh(domain, h):
    lo = domain.vertices.min(axis=0)
    hi = domain.vertices.max(axis=0)
    w, ht = hi - lo
    nx = max(2, math.ceil(w / h * (1.0 - 1e-12)))
    ny = max(2, math.ceil(ht / h * (1.0 - 1e-12)))
    if (nx + 1) * (ny + 1) < 4:
        raise ResolutionTooCoarse(
            f"only {(nx + 1) * (ny + 1)} lattice nodes inside the polygon at h={h}"
        )
    xs = lo[0] + (w / nx) * np.arange(nx + 1)
    ys = lo[1] + (ht / ny) * np.arange(ny + 1)
    xs[-1] = hi[0]
    ys[-1] = hi[1]
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    def nid(i, j):
        return j * (nx + 1) + i

    tris = []
    for j in range(ny):
        for i in range(nx):
            a, b = nid(i, j), nid(i + 1, j)
            c, d = nid(i + 1, j + 1), nid(i, j + 1)
            tris.append((a, b, d))
            tris.append((b, c, d))
    bedges = []
    for i in range(nx):
        bedges.append((nid(i, 0), nid(i + 1, 0)))
        bedges.append((nid(i + 1, ny), nid(i, ny)))
    for j in range(ny):
        bedges.append((nid(nx, j), nid(nx, j + 1)))
        bedges.append((nid(0, j + 1), nid(0, j)))
    tagged = []
    for a, b in bedges:
        mid = 0.5 * (nodes[a] + nodes[b])
        tagged.append((a, b, domain.segment_at(mid)))
    tagged.sort()
    return Mesh(nodes, np.array(tris), tagged, float(h))


def _good_quality(pts, tri, h):
    s = tri.simplices
    p = pts[s]
    ok = True
    lmax = 0.0
    for a, b in ((0, 1), (1, 2), (2, 0)):
        lmax = max(lmax, float(np.max(np.linalg.norm(p[:, a] - p[:, b], axis=1))))
    if lmax > 1.499 * h:
        ok = False
    ln = [np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1) for i in range(3)]
    a, b, c = ln
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        cosang = np.clip((y**2 + z**2 - x**2) / (2 * y * z), -1.0, 1.0)
        if np.min(np.degrees(np.arccos(cosang))) < 20.0:
            ok = False
    return ok


def _long_edge_midpoints(pts, tri, domain, h):
    """Midpoints of edges longer than 1.45h, deduplicated deterministically."""
    s = tri.simplices
    mids = []
    seen = set()
    for a, b in ((0, 1), (1, 2), (2, 0)):
        i, j = s[:, a], s[:, b]
        ln = np.linalg.norm(pts[i] - pts[j], axis=1)
        for t in np.nonzero(ln > 1.45 * h)[0]:
            key = (min(i[t], j[t]), max(i[t], j[t]))
            if key not in seen:
                seen.add(key)
                mids.append(0.5 * (pts[i[t]] + pts[j[t]]))
    if not mids:
        return np.empty((0, 2))
    mids = np.array(sorted(mids, key=lambda p: (p[0], p[1])))
    mids = mids[domain.boundary_distance(mids) > 0.35 * h]
    if len(mids) == 0:
        return np.empty((0, 2))
    near_existing = cKDTree(pts).query(mids, k=1)[0] < 0.45 * h
    mids = mids[~near_existing]
    out = []
    for p in mids:
        if not out or np.min(np.linalg.norm(np.array(out) - p, axis=1)) >= 0.55 * h:
            out.append(p)
    return np.array(out) if out else np.empty((0, 2))


def _smooth_interior(pts, tri, movable):
    n = len(pts)
    neigh_sum = np.zeros((n, 2))
    neigh_cnt = np.zeros(n)
    s = tri.simplices
    for a, b in ((0, 1), (1, 2), (2, 0)):
        np.add.at(neigh_sum, s[:, a], pts[s[:, b]])
        np.add.at(neigh_cnt, s[:, a], 1.0)
        np.add.at(neigh_sum, s[:, b], pts[s[:, a]])
        np.add.at(neigh_cnt, s[:, b], 1.0)
    out = pts.copy()
    out[movable] = neigh_sum[movable] / neigh_cnt[movable, None]
    return out


def _oriented_simplices(pts, tri):
    s = tri.simplices.copy()
    p = pts[s]
    area2 = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 1, 1] - p[:, 0, 1]
    ) * (p[:, 2, 0] - p[:, 0, 0])
    flip = area2 < 0
    s[flip] = s[flip][:, [0, 2, 1]]
    return s


def _boundary_edge_table(pts, simplices, n_bnd, edge_seg):
    """Boundary (hull) edges with their segment ids.

    Consecutive chain nodes k -> k+1 lie on chain edge k, whose segment id is
    known; hull edges are exactly those pairs because every chain node is a
    mesh node on the convex hull.
    """
    count = {}
    for t in simplices:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    out = []
    for (a, b), c in count.items():
        if c != 1:
            continue
        if a >= n_bnd or b >= n_bnd:
            raise DegeneratePolygon("boundary edge touches an interior node")
        if (a + 1) % n_bnd == b:
            out.append((a, b, int(edge_seg[a])))
        elif (b + 1) % n_bnd == a:
            out.append((b, a, int(edge_seg[b])))
        else:
            raise DegeneratePolygon("hull edge skips a boundary chain node")
    out.sort()
    return out
