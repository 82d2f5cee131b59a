"""
Effective and pseudo dimension of a Gaussian kernel
===================================================

Both quantities measure how many "directions" a set of points really spans
at ridge level lam.  They grow slowly with n for a smooth kernel, and the
closed-form bounds sit above them.
"""
import numpy as np

from kql.dimension import (
    KernelDescriptor,
    check_dual_identity,
    d_lambda_bound,
    effective_dimension,
    prefix_widths_sq,
    pseudo_dimension,
)

rng = np.random.default_rng(0)
d, eta, lam = 2, 1.0, 1e-2
X = rng.normal(size=(400, d))
X /= np.maximum(np.linalg.norm(X, axis=1, keepdims=True), 1.0)
sq = np.sum((X[:, None] - X[None]) ** 2, axis=2)
G = np.exp(-eta * sq)

print(" n   d_eff   d_pse   bound")
for n in (10, 50, 100, 200, 400):
    g = G[:n, :n]
    bound = d_lambda_bound(KernelDescriptor("gaussian", d, eta), n, lam)
    print(f"{n:3d} {effective_dimension(g, lam):7.3f} {pseudo_dimension(g, lam):7.3f} {bound:9.1f}")

# d_eff equals the summed squared widths of all points under the full-set norm
print(check_dual_identity(G[:100, :100], lam).line())

# the width of each new point given the ones before it shrinks as space fills up
w2 = np.diag(prefix_widths_sq(G[:100, :100], lam))
for i in (0, 1, 5, 20, 50, 99):
    print(f"point {i:3d}: lam * width^2 = {lam * w2[i]:.4f}")
