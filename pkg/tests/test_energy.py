"""Density / proximal-map tests against brute-force one-dimensional scans.

The independent oracle used throughout is a radial grid scan of the pointwise
objective ``|g - t*ghat|^2/2 + t + (eps/2) t^2`` over t >= 0; by radial
symmetry the 2-vector minimization reduces to that 1-D problem.
"""

import numpy as np
import pytest

from henckyflow.energy import (
    NegativeEps,
    d_psi_star,
    prox_plastic,
    psi_star,
    stress_from_gradient,
    w_eps,
)


def radial_objective(r, t, eps):
    return 0.5 * (r - t) ** 2 + t + 0.5 * eps * t * t


def scan_min(r, eps, t_max, n=10**6):
    """Full brute-force scan: min of the radial objective over a t-grid."""
    t = np.linspace(0.0, t_max, n)
    vals = radial_objective(r, t, eps)
    k = int(np.argmin(vals))
    return t[k], vals[k]


def two_level_scan_min(r, eps, t_max, n_coarse=1000, n_fine=1000):
    """Grid search refined once; equivalent to an n_coarse*n_fine point scan."""
    t = np.linspace(0.0, t_max, n_coarse)
    vals = radial_objective(r[:, None], t[None, :], eps)
    k = np.argmin(vals, axis=1)
    lo = t[np.maximum(k - 1, 0)]
    hi = t[np.minimum(k + 1, n_coarse - 1)]
    tf = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, n_fine)[None, :]
    vf = radial_objective(r[:, None], tf, eps)
    kf = np.argmin(vf, axis=1)
    rows = np.arange(len(r))
    return tf[rows, kf], vf[rows, kf]


class TestPsiStar:
    def test_inside_disk(self):
        assert psi_star(np.array([0.5, 0.0])) == pytest.approx(0.125)

    def test_on_circle_both_branches(self):
        v = psi_star(np.array([1.0, 0.0]))
        assert v == pytest.approx(0.5)
        # branch continuity across |q| = 1
        assert psi_star(np.array([1.0 + 1e-12, 0.0])) == pytest.approx(0.5, abs=1e-11)

    def test_outside_disk(self):
        assert psi_star(np.array([2.0, 0.0])) == pytest.approx(1.5)

    def test_c1_across_switch(self):
        # central finite differences of psi_star match d_psi_star at |q| near 1
        rng = np.random.default_rng(3)
        for _ in range(50):
            q = rng.normal(size=2)
            q = q / np.linalg.norm(q) * (1.0 + rng.uniform(-1e-3, 1e-3))
            step = 1e-6
            fd = np.array(
                [
                    (psi_star(q + step * e) - psi_star(q - step * e)) / (2 * step)
                    for e in np.eye(2)
                ]
            )
            assert np.linalg.norm(fd - d_psi_star(q)) < 1e-5


class TestDPsiStar:
    def test_identity_branch(self):
        q = np.array([0.3, -0.4])
        assert np.allclose(d_psi_star(q), q)

    def test_radial_projection(self):
        assert np.allclose(d_psi_star(np.array([3.0, 4.0])), [0.6, 0.8])

    def test_norm_at_most_one(self):
        rng = np.random.default_rng(0)
        q = rng.normal(scale=4.0, size=(2000, 2))
        assert np.all(np.linalg.norm(d_psi_star(q), axis=1) <= 1.0 + 1e-15)

    def test_fd_jacobian_beyond_yield(self):
        # tangential projection scaled by 1/|q|: at q=(2,0) the Jacobian is diag(0, 0.5)
        q = np.array([2.0, 0.0])
        step = 1e-6
        jac = np.zeros((2, 2))
        for j, e in enumerate(np.eye(2)):
            jac[:, j] = (d_psi_star(q + step * e) - d_psi_star(q - step * e)) / (2 * step)
        assert np.allclose(jac, np.diag([0.0, 0.5]), atol=1e-5)

    def test_one_lipschitz(self):
        rng = np.random.default_rng(1)
        q1 = rng.normal(scale=3.0, size=(5000, 2))
        q2 = rng.normal(scale=3.0, size=(5000, 2))
        lhs = np.linalg.norm(d_psi_star(q1) - d_psi_star(q2), axis=1)
        rhs = np.linalg.norm(q1 - q2, axis=1)
        assert np.all(lhs <= rhs + 1e-12)


class TestProxPlastic:
    def test_zero_gradient(self):
        inc = prox_plastic(np.array([0.0, 0.0]), 0.1)
        assert np.allclose(inc.p, 0.0)
        assert inc.magnitude == 0.0

    def test_scan_oracle_eps0(self):
        t_star, _ = scan_min(2.0, 0.0, 3.0)
        inc = prox_plastic(np.array([2.0, 0.0]), 0.0)
        assert np.allclose(inc.p, [t_star, 0.0], atol=1e-5)
        assert np.allclose(inc.p, [1.0, 0.0], atol=1e-5)

    def test_scan_oracle_eps1(self):
        t_star, _ = scan_min(3.0, 1.0, 3.0)
        inc = prox_plastic(np.array([3.0, 0.0]), 1.0)
        assert np.allclose(inc.p, [t_star, 0.0], atol=1e-5)
        assert np.allclose(inc.p, [1.0, 0.0], atol=1e-5)

    def test_negative_eps_raises(self):
        with pytest.raises(NegativeEps):
            prox_plastic(np.array([1.0, 0.0]), -1e-3)

    def test_subdifferential_relation(self):
        # g - p - eps*p must lie in the subdifferential of |.| at p
        rng = np.random.default_rng(7)
        g = rng.normal(scale=3.0, size=(4000, 2))
        for eps in (0.0, 1e-3, 0.1, 1.0):
            inc = prox_plastic(g, eps)
            z = g - inc.p - eps * inc.p
            active = inc.magnitude > 1e-12
            # active: z = p/|p| exactly
            direction = inc.p[active] / inc.magnitude[active][:, None]
            assert np.allclose(z[active], direction, atol=1e-10)
            # inactive: |z| <= 1
            assert np.all(np.linalg.norm(z[~active], axis=1) <= 1.0 + 1e-12)

    def test_magnitude_matches_norm(self):
        rng = np.random.default_rng(8)
        g = rng.normal(scale=5.0, size=(2000, 2))
        inc = prox_plastic(g, 0.3)
        assert np.allclose(inc.magnitude, np.linalg.norm(inc.p, axis=1), atol=1e-12)


class TestWEps:
    def test_elastic_branch(self):
        for eps in (0.0, 0.1, 1.0):
            assert w_eps(np.array([0.5, 0.0]), eps) == pytest.approx(0.125)

    def test_matches_psi_star_at_eps0(self):
        assert w_eps(np.array([2.0, 0.0]), 0.0) == pytest.approx(1.5)
        rng = np.random.default_rng(11)
        g = rng.normal(scale=4.0, size=(3000, 2))
        assert np.allclose(w_eps(g, 0.0), psi_star(g), atol=1e-13)

    def test_scan_value_eps1(self):
        _, v = scan_min(2.0, 1.0, 3.0)
        assert w_eps(np.array([2.0, 0.0]), 1.0) == pytest.approx(v, abs=1e-5)
        assert w_eps(np.array([2.0, 0.0]), 1.0) == pytest.approx(1.75)

    def test_monotone_along_schedule_and_limit(self):
        # density decreases pointwise as eps decreases (the spec's own example
        # values: w_eps(2,0)=1.5 < w_eps(2,1)=1.75), approaching psi_star
        rng = np.random.default_rng(12)
        g = rng.normal(scale=4.0, size=(2000, 2))
        outside = np.linalg.norm(g, axis=1) > 1.0
        prev = w_eps(g, 1.0)
        for eps in (1e-1, 1e-2, 1e-3, 1e-4):
            cur = w_eps(g, eps)
            assert np.all(cur[outside] <= prev[outside] + 1e-12)
            assert np.all(cur >= psi_star(g) - 1e-12)
            prev = cur
        r = np.linalg.norm(g, axis=1)
        gap_bound = 1e-4 * np.maximum(r - 1.0, 0.0) ** 2 / 2 + 1e-12
        assert np.all(np.abs(w_eps(g, 1e-4) - psi_star(g)) <= gap_bound)


class TestStressFromGradient:
    def test_elastic(self):
        assert np.allclose(stress_from_gradient(np.array([0.5, 0.0]), 0.1), [0.5, 0.0])

    def test_scan_eps0(self):
        t_star, _ = scan_min(2.0, 0.0, 3.0)
        sig = stress_from_gradient(np.array([2.0, 0.0]), 0.0)
        assert np.allclose(sig, [2.0 - t_star, 0.0], atol=1e-5)
        assert np.allclose(sig, [1.0, 0.0], atol=1e-5)

    def test_overstress_identity(self):
        sig = stress_from_gradient(np.array([3.0, 0.0]), 1.0)
        inc = prox_plastic(np.array([3.0, 0.0]), 1.0)
        assert np.allclose(sig, [2.0, 0.0], atol=1e-12)
        assert np.linalg.norm(sig) == pytest.approx(1.0 + 1.0 * inc.magnitude)

    def test_envelope_gradient(self):
        # d w_eps / d g equals the stress (checked by central differences)
        rng = np.random.default_rng(21)
        g = rng.normal(scale=3.0, size=(500, 2))
        step = 1e-6
        for eps in (0.0, 1e-2, 1.0):
            sig = stress_from_gradient(g, eps)
            for j, e in enumerate(np.eye(2)):
                fd = (w_eps(g + step * e, eps) - w_eps(g - step * e, eps)) / (2 * step)
                assert np.max(np.abs(fd - sig[:, j])) < 1e-4


def test_prox_energy_matches_bruteforce_bulk():
    """Random sweep: prox energy value vs a two-level grid scan (1e6 effective)."""
    rng = np.random.default_rng(42)
    n = 20000
    g = rng.normal(size=(n, 2))
    g *= (rng.uniform(0.0, 10.0, size=n) / np.linalg.norm(g, axis=1))[:, None]
    r = np.linalg.norm(g, axis=1)
    for eps in (0.0, 1e-3, 1e-1, 1.0):
        inc = prox_plastic(g, eps)
        ours = radial_objective(r, inc.magnitude, eps)
        _, scanned = two_level_scan_min(r, eps, 11.0)
        assert np.max(np.abs(ours - scanned)) < 1e-5
