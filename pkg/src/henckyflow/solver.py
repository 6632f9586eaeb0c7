"""Minimization of the relaxed plasticity functional by Perzyna continuation.

The three-field problem (displacement, stress, plastic strain) is reduced to
an unconstrained smooth minimization in the nodal displacement alone: the
stress/plastic pair is eliminated pointwise through the closed-form proximal
map, leaving the reduced density ``w_eps`` per triangle.  The relaxed
Dirichlet condition is a Huber-smoothed boundary penalty whose smoothing
width kappa follows the continuation parameter, and Neumann loads enter as a
linear boundary term.

For each eps of a decreasing schedule the energy is minimized with
Nesterov-accelerated gradient descent (restart on energy increase, step from
a power-iteration bound of the Hessian), warm-starting each stage from the
previous one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .energy import prox_plastic, w_eps
from .mesh import Mesh

_POWER_SEED = 74837


class FieldSizeMismatch(ValueError):
    """Nodal/per-triangle field does not match the mesh."""


class EmptyInterior(ValueError):
    """No triangles remain at the requested interior margin."""


class NotConverged(RuntimeError):
    """Final continuation stage hit the iteration cap.

    The best iterate is still available on the ``result`` attribute.
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class SolverConfig:
    """Continuation and optimizer parameters.

    ``boundary_huber`` is the Huber width kappa for the relaxed Dirichlet
    penalty; None couples it to the current eps.
    """

    eps_schedule: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    max_iters_per_eps: int = 20000
    grad_tol: float = 1e-7
    energy_tol: float = 1e-10
    boundary_huber: float | None = None

    def __post_init__(self):
        sched = tuple(float(e) for e in self.eps_schedule)
        object.__setattr__(self, "eps_schedule", sched)
        if len(sched) == 0:
            raise ValueError("eps_schedule must be nonempty")
        if any(e <= 0.0 for e in sched):
            raise ValueError("eps_schedule entries must be positive")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValueError("eps_schedule must be strictly decreasing")
        if self.grad_tol <= 0.0 or self.energy_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iters_per_eps < 1:
            raise ValueError("max_iters_per_eps must be >= 1")
        if self.boundary_huber is not None and self.boundary_huber <= 0.0:
            raise ValueError("boundary_huber must be positive (or None)")


@dataclass
class SolveResult:
    """Minimizer fields plus continuation history.

    ``sigma + p`` equals the P1 gradient of ``u`` on every triangle by
    construction, and ``|sigma| <= 1 + eps_final * p_norm`` up to roundoff.
    ``stage_sigmas`` holds the per-triangle stress at the end of every
    continuation stage (the last entry equals ``sigma``).
    """

    u: np.ndarray
    sigma: np.ndarray
    p: np.ndarray
    p_norm: np.ndarray
    energy_history: list
    div_residual: float
    eps_final: float
    stage_sigmas: list = field(default_factory=list)
    stage_info: list = field(default_factory=list)
    mesh: Mesh | None = None
    domain: object = None
    converged: bool = True


class Assembly:
    """Precomputed P1 operators and boundary data for one mesh/domain pair."""

    def __init__(self, mesh, domain):
        self.mesh = mesh
        self.domain = domain
        T, N = mesh.n_triangles, mesh.n_nodes
        rows = np.repeat(np.arange(T), 3)
        cols = mesh.triangles.ravel()
        self.Gx = sp.csr_matrix((mesh.grads[:, :, 0].ravel(), (rows, cols)), shape=(T, N))
        self.Gy = sp.csr_matrix((mesh.grads[:, :, 1].ravel(), (rows, cols)), shape=(T, N))
        self.GxT = self.Gx.T.tocsr()
        self.GyT = self.Gy.T.tocsr()
        self.areas = mesh.areas

        d_pairs, d_len, d_w, n_pairs, n_len, n_g = [], [], [], [], [], []
        for i, j, sid in mesh.boundary_edges:
            seg = domain.segments[sid]
            length = float(np.linalg.norm(mesh.nodes[j] - mesh.nodes[i]))
            mid = 0.5 * (mesh.nodes[i] + mesh.nodes[j])
            if seg.is_dirichlet:
                d_pairs.append((i, j))
                d_len.append(length)
                d_w.append(float(seg.condition(mid)))
            else:
                n_pairs.append((i, j))
                n_len.append(length)
                n_g.append(seg.condition.g)
        self.d_pairs = np.array(d_pairs, dtype=int).reshape(-1, 2)
        self.d_len = np.array(d_len)
        self.d_w = np.array(d_w)
        self.n_pairs = np.array(n_pairs, dtype=int).reshape(-1, 2)
        self.n_len = np.array(n_len)
        self.n_g = np.array(n_g)

        # constant Neumann part of the gradient: -sum len*g/2 at the endpoints
        self.neumann_grad = np.zeros(N)
        if len(self.n_pairs):
            np.add.at(self.neumann_grad, self.n_pairs[:, 0], -0.5 * self.n_len * self.n_g)
            np.add.at(self.neumann_grad, self.n_pairs[:, 1], -0.5 * self.n_len * self.n_g)

        self.patch_area = np.zeros(N)
        np.add.at(self.patch_area, mesh.triangles[:, 0], mesh.areas)
        np.add.at(self.patch_area, mesh.triangles[:, 1], mesh.areas)
        np.add.at(self.patch_area, mesh.triangles[:, 2], mesh.areas)

        bmask = mesh.boundary_node_mask()
        self.interior_nodes = np.nonzero(~bmask)[0]

    # -- energy pieces ------------------------------------------------------

    def check_field(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.mesh.n_nodes,):
            raise FieldSizeMismatch(
                f"field has shape {u.shape}, expected ({self.mesh.n_nodes},)"
            )
        return u

    def grad_field(self, u):
        return np.column_stack([self.Gx @ u, self.Gy @ u])

    def u_mid_dirichlet(self, u):
        return 0.5 * (u[self.d_pairs[:, 0]] + u[self.d_pairs[:, 1]])

    def energy(self, u, eps, kappa):
        g = self.grad_field(u)
        e = float(self.areas @ w_eps(g, eps))
        if len(self.d_pairs):
            s = self.d_w - self.u_mid_dirichlet(u)
            e += float(self.d_len @ _huber(s, kappa))
        if len(self.n_pairs):
            u_mid = 0.5 * (u[self.n_pairs[:, 0]] + u[self.n_pairs[:, 1]])
            e -= float(self.n_len @ (self.n_g * u_mid))
        return e

    def gradient(self, u, eps, kappa):
        g = self.grad_field(u)
        sigma = g - prox_plastic(g, eps).p
        out = self.GxT @ (self.areas * sigma[:, 0]) + self.GyT @ (self.areas * sigma[:, 1])
        if len(self.d_pairs):
            s = self.d_w - self.u_mid_dirichlet(u)
            hp = np.clip(s / kappa, -1.0, 1.0)
            np.add.at(out, self.d_pairs[:, 0], -0.5 * self.d_len * hp)
            np.add.at(out, self.d_pairs[:, 1], -0.5 * self.d_len * hp)
        out += self.neumann_grad
        return out, sigma

    def scaled_grad_norm(self, grad):
        return float(np.max(np.abs(grad) / (self.mesh.h * self.patch_area)))

    def hessian_bound(self, kappa):
        """Upper Lipschitz constant of the gradient via 20 power iterations.

        The reduced density has 1-Lipschitz gradient, so its Hessian is
        dominated by the P1 stiffness operator; the Huber term contributes at
        most len/(4 kappa) per Dirichlet edge.
        """

        def apply(v):
            out = self.GxT @ (self.areas * (self.Gx @ v)) + self.GyT @ (
                self.areas * (self.Gy @ v)
            )
            if len(self.d_pairs):
                t = (self.d_len / (4.0 * kappa)) * (
                    v[self.d_pairs[:, 0]] + v[self.d_pairs[:, 1]]
                )
                np.add.at(out, self.d_pairs[:, 0], t)
                np.add.at(out, self.d_pairs[:, 1], t)
            return out

        rng = np.random.default_rng(_POWER_SEED)
        v = rng.standard_normal(self.mesh.n_nodes)
        v /= np.linalg.norm(v)
        lam = 1.0
        for _ in range(20):
            w = apply(v)
            lam = float(v @ w)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
        return 1.05 * max(lam, 1e-12)

    def affine_dirichlet_fit(self):
        """Least-squares affine fit of the Dirichlet data, evaluated at nodes."""
        pts, vals = [], []
        for (i, j), wm in zip(self.d_pairs, self.d_w):
            pts.append(0.5 * (self.mesh.nodes[i] + self.mesh.nodes[j]))
            vals.append(wm)
        if not pts:
            return np.zeros(self.mesh.n_nodes)
        pts = np.array(pts)
        A = np.column_stack([np.ones(len(pts)), pts])
        coef, *_ = np.linalg.lstsq(A, np.array(vals), rcond=None)
        return coef[0] + self.mesh.nodes @ coef[1:]


def _huber(s, kappa):
    a = np.abs(s)
    return np.where(a <= kappa, 0.5 * s * s / kappa, a - 0.5 * kappa)


def discrete_energy(mesh, domain, u, eps, kappa):
    """Total discrete energy: interior reduced density + Huber-relaxed
    Dirichlet penalty - Neumann work."""
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    asm = Assembly(mesh, domain)
    return asm.energy(asm.check_field(u), eps, kappa)


def _run_stage(asm, u, eps, kappa, config):
    """One continuation stage; returns (u, stage record, history rows)."""
    L = asm.hessian_bound(kappa)
    step = 1.0 / L
    x = u.copy()
    x_prev = x.copy()
    t = 1.0
    E_x = asm.energy(x, eps, kappa)
    history = [(eps, 0, E_x)]
    energies = [E_x]
    reason = "max_iters"
    scaled = np.inf
    k = 0
    for k in range(1, config.max_iters_per_eps + 1):
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_next
        y = x + beta * (x - x_prev)
        gy, _ = asm.gradient(y, eps, kappa)
        x_new = y - step * gy
        E_new = asm.energy(x_new, eps, kappa)
        if E_new > E_x:
            # restart: plain descent step from x is guaranteed to decrease
            t_next = 1.0
            gx, _ = asm.gradient(x, eps, kappa)
            x_new = x - step * gx
            E_new = asm.energy(x_new, eps, kappa)
        x_prev, x, E_x, t = x, x_new, E_new, t_next
        history.append((eps, k, E_x))
        energies.append(E_x)

        if k % 25 == 0 or k == config.max_iters_per_eps:
            gx, _ = asm.gradient(x, eps, kappa)
            scaled = asm.scaled_grad_norm(gx)
            if scaled <= config.grad_tol:
                reason = "grad_tol"
                break
        if k >= 50:
            drop = energies[-51] - energies[-1]
            if drop <= config.energy_tol * max(1.0, abs(E_x)):
                reason = "energy_stall"
                break
    record = {
        "eps": eps,
        "kappa": kappa,
        "iterations": k,
        "energy": E_x,
        "scaled_grad": scaled,
        "stopped_by": reason,
        "lipschitz": L,
    }
    return x, record, history


def minimize(mesh, domain, config=None, u0=None):
    """Minimize the relaxed functional along the eps schedule.

    Parameters
    ----------
    config : SolverConfig, optional
    u0 : array, optional
        Initial nodal field; defaults to the affine least-squares fit of the
        Dirichlet data.

    Returns
    -------
    SolveResult

    Raises
    ------
    NotConverged
        If the final stage stops on the iteration cap; the exception carries
        the result computed so far.
    """
    config = config or SolverConfig()
    asm = Assembly(mesh, domain)
    u = asm.check_field(u0) if u0 is not None else asm.affine_dirichlet_fit()
    u = u.astype(float).copy()

    history = []
    stage_sigmas = []
    stage_info = []
    for eps in config.eps_schedule:
        kappa = config.boundary_huber if config.boundary_huber is not None else eps
        u, record, stage_hist = _run_stage(asm, u, eps, kappa, config)
        history.extend(stage_hist)
        g = asm.grad_field(u)
        stage_sigmas.append(g - prox_plastic(g, eps).p)
        stage_info.append(record)

    eps_final = config.eps_schedule[-1]
    g = asm.grad_field(u)
    inc = prox_plastic(g, eps_final)
    sigma = g - inc.p
    result = SolveResult(
        u=u,
        sigma=sigma,
        p=inc.p,
        p_norm=inc.magnitude,
        energy_history=history,
        div_residual=divergence_residual(mesh, sigma),
        eps_final=eps_final,
        stage_sigmas=stage_sigmas,
        stage_info=stage_info,
        mesh=mesh,
        domain=domain,
        converged=stage_info[-1]["stopped_by"] != "max_iters",
    )
    if not result.converged:
        raise NotConverged(
            f"final stage (eps={eps_final}) hit the iteration cap "
            f"(scaled grad {stage_info[-1]['scaled_grad']:.3e})",
            result,
        )
    return result


def divergence_residual(mesh, sigma):
    """Scaled weak divergence: max over interior nodes of
    ``|sum_T area sigma . grad(phi_i)| / (h * patch_area_i)``."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (mesh.n_triangles, 2):
        raise FieldSizeMismatch(
            f"sigma has shape {sigma.shape}, expected ({mesh.n_triangles}, 2)"
        )
    N = mesh.n_nodes
    acc = np.zeros(N)
    patch = np.zeros(N)
    w = mesh.areas[:, None] * sigma  # (T,2)
    for i in range(3):
        contrib = np.einsum("td,td->t", mesh.grads[:, i, :], w)
        np.add.at(acc, mesh.triangles[:, i], contrib)
        np.add.at(patch, mesh.triangles[:, i], mesh.areas)
    interior = ~mesh.boundary_node_mask()
    if not np.any(interior):
        return 0.0
    return float(np.max(np.abs(acc[interior]) / (mesh.h * patch[interior])))


def h1_seminorm_interior(mesh, sigma_history, margin):
    """Discrete interior H1 seminorm of each stress field in a history.

    The per-triangle gradient of each stress component is reconstructed by a
    least-squares linear fit over the vertex-neighborhood centroids, and the
    seminorm is restricted to triangles farther than ``margin`` from the mesh
    boundary.
    """
    if margin <= 0.0:
        raise ValueError("margin must be positive")
    interior = interior_triangles(mesh, margin)
    if not np.any(interior):
        raise EmptyInterior(f"no triangles at distance > {margin} from the boundary")

    node_tris = [[] for _ in range(mesh.n_nodes)]
    for t, tri in enumerate(mesh.triangles):
        for n in tri:
            node_tris[n].append(t)
    idx = np.nonzero(interior)[0]
    pinvs = []
    neighborhoods = []
    for t in idx:
        neigh = sorted({s for n in mesh.triangles[t] for s in node_tris[n]})
        A = np.column_stack([np.ones(len(neigh)), mesh.centroids[neigh]])
        pinvs.append(np.linalg.pinv(A))
        neighborhoods.append(neigh)

    out = []
    for sigma in sigma_history:
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (mesh.n_triangles, 2):
            raise FieldSizeMismatch("stress history entry has the wrong shape")
        total = 0.0
        for t, P, neigh in zip(idx, pinvs, neighborhoods):
            coef = P @ sigma[neigh]  # (3, 2); rows 1,2 are the gradients
            total += mesh.areas[t] * float(np.sum(coef[1:, :] ** 2))
        out.append(float(np.sqrt(total)))
    return out


def interior_triangles(mesh, margin):
    """Boolean mask of triangles whose centroid is > margin from the mesh boundary."""
    bsegs = [(mesh.nodes[i], mesh.nodes[j]) for i, j, _ in mesh.boundary_edges]
    d = np.full(mesh.n_triangles, np.inf)
    c = mesh.centroids
    for a, b in bsegs:
        e = b - a
        L2 = float(e @ e)
        t = np.clip((c - a) @ e / L2, 0.0, 1.0)
        proj = a + t[:, None] * e
        d = np.minimum(d, np.linalg.norm(c - proj, axis=1))
    return d > margin
