"""l_p polar decomposition beta = tau beta0 with tau an l_p isometry.

Rows of beta are grouped into projective classes. Each class becomes one
disjoint-support column of tau, normalized in l_p.
"""

import numpy as np

from popspace import entrywise_norm, is_lp_isometry, is_polar_decomposable, polar_decompose

beta = np.array([[1, 0], [2, 0], [0, 3]], dtype=float)
dec = polar_decompose(beta, 3)
print("tau =\n", dec.tau.real)
print("beta0 =\n", dec.beta0.real)
print("lambda =", dec.lam, " groups =", dec.parts)
print("tau is an l_3 isometry:", bool(is_lp_isometry(dec.tau, 3)))
print("||beta||_3 =", entrywise_norm(beta, 3), " ||beta0||_3 =", entrywise_norm(dec.beta0, 3))

# three pairwise non-proportional rows cannot be carried by two columns
print(is_polar_decomposable([[1, 0], [0, 1], [1, 1]], 3))
