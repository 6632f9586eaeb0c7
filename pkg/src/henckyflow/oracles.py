"""Closed-form solution families evaluated on meshes, used as ground truth.

Three families are provided:

* vortex fans: unit stress rotating about an apex, displacement a monotone
  function of the angle;
* the mixed-condition trapezoid: uniform diagonal stress with a one-parameter
  family of displacements parameterized by a monotone profile of x+y;
* a one-parameter family of straight characteristics ``y = x/t - t`` that
  neither concur at a point nor are parallel, with an explicit
  stress/displacement/plastic-strain triple.

Monotone profiles are supplied as tables so every oracle is reproducible and
serializable.  Piecewise-linear tables cover the fan and trapezoid profiles;
the last family needs a C^1 profile, stored as a cubic-Hermite table (knot
values plus knot derivatives).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .solver import SolveResult, divergence_residual

SQRT2 = math.sqrt(2.0)


class ApexSingularity(ValueError):
    """Evaluation point coincides with the fan apex."""


class AngleOutOfRange(ValueError):
    """Evaluation angle falls outside the fan profile table."""


class PointOutsideTrapezoid(ValueError):
    pass


class PointOutsideRegion(ValueError):
    pass


class DerivativeConditionViolated(ValueError):
    """Profile derivative fails the slope bound required for |p| >= 0."""


class CoverageError(ValueError):
    """Mesh is not covered by the oracle's validity region."""


# ---------------------------------------------------------------------------
# monotone profile tables
# ---------------------------------------------------------------------------


class MonotoneTable:
    """Piecewise-linear monotone function from a knot table.

    Duplicate abscissae encode jumps; evaluation is left-continuous there.
    ``slope`` returns the derivative of the piece containing the point (the
    left piece at a knot), with ``inf`` on zero-width jump pieces.
    """

    def __init__(self, knots, nondecreasing=True):
        knots = [(float(t), float(v)) for t, v in knots]
        if len(knots) < 2:
            raise ValueError("need at least two knots")
        t = np.array([k[0] for k in knots])
        v = np.array([k[1] for k in knots])
        if np.any(np.diff(t) < 0.0):
            raise ValueError("knot abscissae must be non-decreasing")
        dv = np.diff(v)
        if nondecreasing and np.any(dv < -1e-12):
            raise ValueError("table values must be non-decreasing")
        self.t = t
        self.v = v
        # strictly increasing internal abscissae so interp sees jumps as
        # infinitesimally thin ramps (left-continuous at the jump point)
        scale = max(t[-1] - t[0], 1.0)
        bump = np.cumsum(np.where(np.diff(t) == 0.0, 1e-14 * scale, 0.0))
        self._ti = t.copy()
        self._ti[1:] += bump

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self._ti, self.v)

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self._ti, x, side="left"), 1, len(self.t) - 1)
        dt = self.t[i] - self.t[i - 1]
        dv = self.v[i] - self.v[i - 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(dt > 0.0, dv / np.where(dt > 0.0, dt, 1.0), np.inf)
        return np.where(dv == 0.0, 0.0, s)

    @property
    def t_min(self):
        return float(self.t[0])

    @property
    def t_max(self):
        return float(self.t[-1])

    def knots(self):
        return [[float(a), float(b)] for a, b in zip(self.t, self.v)]


class HermiteTable:
    """Monotone C^1 function from knot values and knot derivatives."""

    def __init__(self, t, v, dv):
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        dv = np.asarray(dv, dtype=float)
        if len(t) < 2 or np.any(np.diff(t) <= 0.0):
            raise ValueError("knot abscissae must be strictly increasing")
        self.t, self.v, self.dv = t, v, dv

    @classmethod
    def from_values(cls, t, v):
        """Derivatives estimated by centered differences of the values."""
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        dv = np.gradient(v, t)
        return cls(t, v, dv)

    def _piece(self, x):
        i = np.clip(np.searchsorted(self.t, x, side="right") - 1, 0, len(self.t) - 2)
        h = self.t[i + 1] - self.t[i]
        s = (x - self.t[i]) / h
        return i, h, s

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i, h, s = self._piece(x)
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (
            h00 * self.v[i]
            + h10 * h * self.dv[i]
            + h01 * self.v[i + 1]
            + h11 * h * self.dv[i + 1]
        )

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        i, h, s = self._piece(x)
        d00 = 6 * s * (s - 1)
        d10 = (1 - s) * (1 - 3 * s)
        d01 = -d00
        d11 = s * (3 * s - 2)
        return (
            d00 * self.v[i] / h
            + d10 * self.dv[i]
            + d01 * self.v[i + 1] / h
            + d11 * self.dv[i + 1]
        )

    @property
    def t_min(self):
        return float(self.t[0])

    @property
    def t_max(self):
        return float(self.t[-1])


# ---------------------------------------------------------------------------
# fan (vortex) oracle
# ---------------------------------------------------------------------------


@dataclass
class FanOracle:
    """Unit vortex stress about an apex with angle-driven displacement.

    ``angle_profile`` maps the polar angle about the apex (radians, measured
    from the positive x-axis) to the displacement magnitude; it must be
    non-decreasing.
    """

    apex: tuple
    alpha: int
    angle_profile: MonotoneTable

    def __post_init__(self):
        if self.alpha not in (-1, 1):
            raise ValueError("alpha must be +1 or -1")
        span = self.angle_profile.t_max - self.angle_profile.t_min
        if not (0.0 < span < 2 * math.pi):
            raise ValueError("angle profile must span a nonempty sub-arc")


def fan_eval(oracle, x):
    """Stress and displacement of a fan at point(s) x.

    sigma = alpha * (x - apex)^perp / |x - apex| (exactly unimodular),
    u = alpha * profile(angle).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    d = pts - np.asarray(oracle.apex, dtype=float)
    r = np.linalg.norm(d, axis=1)
    if np.any(r < 1e-12):
        raise ApexSingularity("evaluation at the fan apex")
    theta = np.arctan2(d[:, 1], d[:, 0])
    prof = oracle.angle_profile
    if np.any(theta < prof.t_min - 1e-9) or np.any(theta > prof.t_max + 1e-9):
        raise AngleOutOfRange(
            f"angle outside profile span [{prof.t_min}, {prof.t_max}]"
        )
    sigma = oracle.alpha * np.column_stack([-d[:, 1], d[:, 0]]) / r[:, None]
    u = oracle.alpha * prof(np.clip(theta, prof.t_min, prof.t_max))
    if single:
        return sigma[0], float(u[0])
    return sigma, u


def _fan_plastic(oracle, pts):
    """p = (h'(theta)/r - 1) sigma; the gradient of u minus the stress."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    d = pts - np.asarray(oracle.apex, dtype=float)
    r = np.linalg.norm(d, axis=1)
    theta = np.arctan2(d[:, 1], d[:, 0])
    sigma, _ = fan_eval(oracle, pts)
    lam = oracle.angle_profile.slope(theta) / r - 1.0
    return lam[:, None] * sigma


# ---------------------------------------------------------------------------
# trapezoid oracle
# ---------------------------------------------------------------------------


@dataclass
class TrapezoidOracle:
    """Uniform diagonal stress on the mixed-condition trapezoid.

    ``z_profile`` is the monotone function Z of t = x1 + x2 that
    parameterizes the family of admissible displacements:
    u = (t + Z(t)) / sqrt(2).  It must vanish on (0, d) and reach
    (a - 1) * ell at t = ell.
    """

    d: float
    ell: float
    a: float
    z_profile: MonotoneTable

    def __post_init__(self):
        if not (0.0 < self.d < self.ell):
            raise ValueError("need 0 < d < ell")
        if self.a <= 1.0:
            raise ValueError("need a > 1")
        z = self.z_profile
        probe = np.linspace(1e-9, self.d * (1 - 1e-9), 17)
        if np.any(np.abs(z(probe)) > 1e-10):
            raise ValueError("Z must vanish on (0, d)")
        target = (self.a - 1.0) * self.ell
        if abs(float(z.v[-1]) - target) > 1e-9 * max(1.0, target):
            raise ValueError("Z must reach (a-1)*ell at t = ell")


def trapezoid_eval(oracle, x):
    """(sigma, u, lambda density) at interior point(s) of the trapezoid.

    sigma = (1,1)/sqrt(2); u = (x1+x2+Z(x1+x2))/sqrt(2); the plastic density
    per unit length along the line x1+x2 = c is the slope of Z at c.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    tol = 1e-9
    ok = (
        (pts[:, 0] >= -tol)
        & (pts[:, 0] <= oracle.d + tol)
        & (pts[:, 1] >= -tol)
        & (pts[:, 0] + pts[:, 1] <= oracle.ell + tol)
    )
    if not np.all(ok):
        raise PointOutsideTrapezoid(f"{int(np.sum(~ok))} point(s) outside the trapezoid")
    t = pts[:, 0] + pts[:, 1]
    u = (t + oracle.z_profile(t)) / SQRT2
    lam = oracle.z_profile.slope(t)
    sigma = np.full((len(pts), 2), 1.0 / SQRT2)
    if single:
        return sigma[0], float(u[0]), float(lam[0])
    return sigma, u, lam


def step_z_profile(d, ell, a):
    """Z identically zero with the whole increment jumping at t = ell."""
    return MonotoneTable([(0.0, 0.0), (ell, 0.0), (ell, (a - 1.0) * ell)])


def ramp_z_profile(d, ell, a):
    """Z rising linearly on (d, ell) to the required increment."""
    return MonotoneTable([(0.0, 0.0), (d, 0.0), (ell, (a - 1.0) * ell)])


# ---------------------------------------------------------------------------
# one-parameter family of non-concurrent characteristics
# ---------------------------------------------------------------------------


@dataclass
class Family453Oracle:
    """Smooth field whose characteristics are the lines y = x/t - t, t > 0.

    The lines neither concur at a point nor are parallel.  With
    s(x, y) = sqrt(y^2 + 4x) - y:

        sigma = (2 / sqrt(4 + s^2)) * (-1, s/2),   |sigma| = 1,
        u     = f(s),
        p     = -(sqrt(4 + s^2)/sqrt(y^2 + 4x) * f'(s) + 1) * sigma,

    and p = sigma |p| holds with |p| >= 0 provided
    f'(t) <= -(R + t)/sqrt(4 + t^2) on the relevant range.
    """

    R: float
    f_profile: HermiteTable = None

    def __post_init__(self):
        if self.R <= 0.0:
            raise ValueError("R must be positive")
        if self.f_profile is None:
            self.f_profile = default_f_profile(self.R)
        f = self.f_profile
        bound = -(self.R + f.t) / np.sqrt(4.0 + f.t**2)
        if np.any(f.dv > bound + 1e-12):
            raise DerivativeConditionViolated(
                "profile slope must satisfy f'(t) <= -(R+t)/sqrt(4+t^2) at all knots"
            )
        if np.any(np.diff(f.v) >= 0.0):
            raise DerivativeConditionViolated("profile must be strictly decreasing")


def default_f_profile(R, n=10_000):
    """Default decreasing profile: f(t) = -int_0^t (R+s+0.1)/sqrt(4+s^2) ds.

    Trapezoidal quadrature on n+1 knots; satisfies the slope bound with
    margin 0.1/sqrt(4+t^2).
    """
    t_hi = 2.0 * math.sqrt(R) + 0.2
    t = np.linspace(0.0, t_hi, n + 1)
    integrand = (R + t + 0.1) / np.sqrt(4.0 + t**2)
    f = np.zeros_like(t)
    f[1:] = -np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t))
    return HermiteTable(t, f, -integrand)


def family453_eval(oracle, x):
    """(sigma, u, p) of the line-family field at point(s) in (0, R)^2."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    tol = 1e-12
    if np.any(pts <= tol) or np.any(pts >= oracle.R - tol):
        raise PointOutsideRegion("points must lie strictly inside (0, R)^2")
    xx, yy = pts[:, 0], pts[:, 1]
    root = np.sqrt(yy**2 + 4.0 * xx)
    s = root - yy
    f = oracle.f_profile
    if np.any(s < f.t_min - 1e-12) or np.any(s > f.t_max + 1e-12):
        raise PointOutsideRegion("profile table does not cover the s-range")
    denom = np.sqrt(4.0 + s**2)
    sigma = np.column_stack([-2.0 / denom, s / denom])
    u = f(s)
    mag = -(denom / root * f.deriv(s) + 1.0)
    p = mag[:, None] * sigma
    if single:
        return sigma[0], float(u[0]), p[0]
    return sigma, u, p


# ---------------------------------------------------------------------------
# oracle fields on a mesh
# ---------------------------------------------------------------------------


def oracle_fields_on_mesh(oracle, mesh, domain=None):
    """Evaluate an oracle into solver-shaped fields on a mesh.

    u at nodes, sigma/p at triangle centroids; packaged as a
    :class:`~henckyflow.solver.SolveResult` so the analysis operations run
    unchanged on oracle fields.
    """
    try:
        if isinstance(oracle, FanOracle):
            sigma, _ = fan_eval(oracle, mesh.centroids)
            p = _fan_plastic(oracle, mesh.centroids)
            _, u = fan_eval(oracle, mesh.nodes)
        elif isinstance(oracle, TrapezoidOracle):
            sigma, _, lam = trapezoid_eval(oracle, mesh.centroids)
            p = lam[:, None] * sigma
            _, u, _ = trapezoid_eval(oracle, mesh.nodes)
        elif isinstance(oracle, Family453Oracle):
            sigma, _, p = family453_eval(oracle, mesh.centroids)
            _, u, _ = family453_eval(oracle, mesh.nodes)
        else:
            raise TypeError(f"unknown oracle type {type(oracle).__name__}")
    except (
        ApexSingularity,
        AngleOutOfRange,
        PointOutsideTrapezoid,
        PointOutsideRegion,
    ) as exc:
        raise CoverageError(f"mesh not covered by the oracle: {exc}") from exc

    p_norm = np.linalg.norm(p, axis=1)
    return SolveResult(
        u=np.asarray(u, dtype=float),
        sigma=sigma,
        p=p,
        p_norm=p_norm,
        energy_history=[],
        div_residual=divergence_residual(mesh, sigma),
        eps_final=0.0,
        stage_sigmas=[sigma],
        stage_info=[],
        mesh=mesh,
        domain=domain,
        converged=True,
    )
