"""Pseudo-inverse with explicit rank decisions.

The SVD cutoff decides which directions count as signal. For a redundant
regressor set the gram matrix is singular; the pseudo-inverse drops the
null direction instead of blowing up, and the rank decision is reported
alongside the result.
"""

import numpy as np

import deltauq as dq

rng = np.random.default_rng(0)

print("A full-rank matrix behaves like the ordinary inverse:")
a = rng.normal(size=(3, 3))
r = dq.pseudo_inverse(a)
print(f"  rank {r.numerical_rank}, |pinv @ a - I| = {np.abs(r.pinv @ a - np.eye(3)).max():.2e}")

print("\nA rank-one matrix keeps only its single signal direction:")
ones = np.ones((2, 2))
r = dq.pseudo_inverse(ones)
print(f"  singular values {r.singular_values}, cutoff {r.cutoff:.2e}")
print(f"  rank {r.numerical_rank}, pinv =\n{r.pinv}")

print("\nThe four defining conditions hold either way:")
for name, lhs, rhs in [
    ("M M+ M = M ", ones @ r.pinv @ ones, ones),
    ("M+ M M+ = M+", r.pinv @ ones @ r.pinv, r.pinv),
]:
    print(f"  {name} residual {np.abs(lhs - rhs).max():.2e}")

print("\nRedundant regressors [1, x, x+1, x^2] make the gram matrix singular:")
model = dq.LinearModel((dq.poly(0), dq.poly(1), dq.affine(1.0, 1.0), dq.poly(2)))
x = rng.uniform(-1, 1, 40)
design = dq.regressor_matrix(model, np.zeros(4), x)
r = dq.pseudo_inverse(design @ design.T)
print(f"  4x4 gram matrix has numerical rank {r.numerical_rank}")
print(f"  relative singular values: {np.round(r.singular_values / r.singular_values[0], 18)}")

print("\nBlock inversion cross-checks against the direct inverse:")
a, b = rng.normal(size=(2, 2)) + 3 * np.eye(2), rng.normal(size=(2, 1))
c, d = rng.normal(size=(1, 2)), rng.normal(size=(1, 1)) + 3 * np.eye(1)
full = np.block([[a, b], [c, d]])
diff = np.abs(dq.block_inverse(a, b, c, d) - np.linalg.inv(full)).max()
print(f"  |block inverse - direct inverse| = {diff:.2e}")
