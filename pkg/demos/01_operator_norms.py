"""Two-sided estimates of the p -> p operator norm.

The power method gives a lower bound with a witness vector. The upper bound
is the smallest of several interpolation-type bounds. On tiny matrices a
brute-force grid oracle shows where the true value sits.
"""

import numpy as np

from popspace import opnorm, opnorm_oracle_small

rng = np.random.default_rng(0)
A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))

for p in (1.5, 2.0, 3.0, 4.0):
    est = opnorm(A, p)
    oracle = opnorm_oracle_small(A, p)
    print(f"p = {p:>3}: lower {est.lower:.6f}  oracle {oracle:.6f}  upper {est.upper:.6f}")

# at p = 2 the lower bound is the largest singular value
print("sigma_max:", np.linalg.svd(A, compute_uv=False)[0])
