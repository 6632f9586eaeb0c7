"""Plastic energy densities, conjugates and proximal maps for the unit-disk yield set.

All formulas are closed form.  Vector arguments are arrays of shape
``(..., 2)`` and broadcast over the leading axes, so the same functions serve
both pointwise evaluation and whole per-triangle fields.

The regularized dissipation is ``|p| + (eps/2)|p|^2``; ``eps = 0`` recovers
the raw one-homogeneous dissipation whose reduced density is the conjugate
``psi_star``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NegativeEps(ValueError):
    """Raised when a regularization parameter is negative."""


@dataclass(frozen=True)
class PlasticIncrement:
    """Pointwise plastic strain with its cached Euclidean magnitude."""

    p: np.ndarray
    magnitude: np.ndarray


def _check_eps(eps):
    if eps < 0.0:
        raise NegativeEps(f"eps must be >= 0, got {eps}")


def _norm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def psi_star(q):
    """Convex conjugate of the elastic-plus-yield potential.

    Two branches: ``|q|^2 / 2`` inside the closed unit disk, ``|q| - 1/2``
    outside.  Continuous and C^1 across ``|q| = 1``.
    """
    r = _norm(q)
    return np.where(r <= 1.0, 0.5 * r * r, r - 0.5)


def d_psi_star(q):
    """Gradient of :func:`psi_star`: identity inside the unit disk, radial
    projection ``q/|q|`` outside.  1-Lipschitz, with ``|result| <= 1``."""
    q = np.asarray(q, dtype=float)
    r = _norm(q)
    safe = np.maximum(r, 1.0)
    return q / safe[..., None]


def prox_plastic(g, eps):
    """Minimize ``|g - p|^2/2 + |p| + (eps/2)|p|^2`` over p.

    The minimizer is radial: ``p = m * g/|g|`` with
    ``m = max(|g| - 1, 0) / (1 + eps)``; in particular ``p = 0`` whenever
    ``|g| <= 1``.

    Parameters
    ----------
    g : array, shape (..., 2)
        Total gradient (the role of grad u).
    eps : float
        Perzyna parameter, >= 0.

    Returns
    -------
    PlasticIncrement
        ``p`` with shape matching ``g`` and ``magnitude = |p|``.
    """
    _check_eps(eps)
    g = np.asarray(g, dtype=float)
    r = _norm(g)
    m = np.maximum(r - 1.0, 0.0) / (1.0 + eps)
    scale = np.where(r > 0.0, m / np.maximum(r, 1e-300), 0.0)
    p = g * scale[..., None]
    return PlasticIncrement(p=p, magnitude=m)


def w_eps(g, eps):
    """Reduced regularized density: the inner minimum over p of
    ``|g - p|^2/2 + |p| + (eps/2)|p|^2``.

    Convex and C^1 in g; coincides with :func:`psi_star` at ``eps = 0`` and
    decreases monotonically in eps wherever ``|g| > 1``.
    """
    _check_eps(eps)
    r = _norm(g)
    m = np.maximum(r - 1.0, 0.0) / (1.0 + eps)
    elastic = 0.5 * r * r
    plastic = 0.5 * (r - m) ** 2 + m + 0.5 * eps * m * m
    return np.where(r <= 1.0, elastic, plastic)


def stress_from_gradient(g, eps):
    """Stress associated with a total gradient: ``sigma = g - prox_plastic(g, eps)``.

    Beyond the yield surface ``|sigma| = 1 + eps*|p|`` (Perzyna overstress);
    below it ``sigma = g``.  This is also the gradient of :func:`w_eps` in g.
    """
    inc = prox_plastic(g, eps)
    return np.asarray(g, dtype=float) - inc.p
