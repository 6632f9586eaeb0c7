"""Walk through the pointwise building blocks: the two-branch conjugate
density, its gradient, and the proximal map eliminating the plastic strain.

Everything downstream reduces to these three maps evaluated per triangle.
"""

import numpy as np

from henckyflow import d_psi_star, prox_plastic, psi_star, stress_from_gradient, w_eps

print("conjugate density: elastic branch |q|^2/2 inside the unit disk,")
print("linear-growth branch |q| - 1/2 outside\n")
for r in (0.0, 0.5, 1.0, 1.5, 2.0, 4.0):
    q = np.array([r, 0.0])
    print(f"  |q| = {r:<4}  psi*(q) = {psi_star(q):.4f}   |Dpsi*(q)| = "
          f"{np.linalg.norm(d_psi_star(q)):.4f}")

print("\nproximal map: plastic strain is the radial shrinkage beyond the disk,")
print("damped by the regularization parameter eps\n")
g = np.array([2.0, 0.0])
for eps in (0.0, 0.1, 1.0):
    inc = prox_plastic(g, eps)
    sigma = stress_from_gradient(g, eps)
    print(f"  eps = {eps:<4}  p = {inc.p}   sigma = {sigma}   "
          f"|sigma| = {np.linalg.norm(sigma):.4f} = 1 + eps|p|")

print("\nreduced density w_eps interpolates between the regularized problem")
print("and the conjugate as eps goes to zero:\n")
for eps in (1.0, 0.1, 0.01, 0.001, 0.0):
    print(f"  eps = {eps:<6}  w_eps((2,0)) = {float(w_eps(g, eps)):.6f}"
          f"   (psi* = {float(psi_star(g)):.6f})")

print("\nenvelope identity: the stress is the gradient of the reduced density")
eps = 0.1
step = 1e-6
fd = np.array([
    (w_eps(g + step * e, eps) - w_eps(g - step * e, eps)) / (2 * step)
    for e in np.eye(2)
])
print(f"  finite differences {fd} vs stress_from_gradient {stress_from_gradient(g, eps)}")
