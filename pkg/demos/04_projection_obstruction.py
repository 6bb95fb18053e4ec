"""Norm-one projections onto subspaces of l_p^m.

A coordinate subspace is the range of a coordinate projection of norm 1.
A generic two-dimensional subspace of l_4^4 is not: the best projection the
search finds has norm above 1, and the value is stable across seeds. The
phi / psi maps between the column space and operators on C (+)_p E are
contractive and psi(phi(x)) = x.
"""

import numpy as np

from popspace import SubspaceEmbedding, counterexample_report, projection_constant

coord = SubspaceEmbedding(np.eye(4)[:, :2], 4)
print("coordinate subspace:", projection_constant(coord, restarts=8).value)

E = SubspaceEmbedding([[1, 1], [1, -1], [1, 0], [0, 1]], 4)
for seed in (1, 2, 3):
    print(f"non-coordinate subspace, seed {seed}:", projection_constant(E, seed=seed).value)

rep = counterexample_report(E, n_max=2, trials=5)
print("flags:", rep["flags"])
print("phi/psi cases:", rep["phiPsi"]["cases"], " violations:", len(rep["phiPsi"]["violations"]))
