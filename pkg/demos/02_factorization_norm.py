"""The projective factorization norm ||v||_{1,n}.

Upper bounds come from explicit factorizations v = alpha w beta. Lower bounds
come from dual matrices f scored by |<f, v>| / (upper bound of ||f||).
For identities, rank-one matrices and p = 2 the two sides meet. For a
generic matrix at p != 2 a gap of a few percent usually remains.
"""

import numpy as np

from popspace import Exponent, factnorm1, nuclear_oracle_p2, vec_p_norm

rng = np.random.default_rng(1)
e = Exponent(3)

est = factnorm1(np.eye(3), e)
print(f"identity, n = 3: [{est.lower:.8f}, {est.upper:.8f}] (exact 3)")

x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
y = rng.standard_normal(3) + 1j * rng.standard_normal(3)
est = factnorm1(np.outer(x, y), e)
exact = vec_p_norm(x, e.p_conj) * vec_p_norm(y, e.p)
print(f"rank one: [{est.lower:.8f}, {est.upper:.8f}] (exact {exact:.8f})")

v = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
est = factnorm1(v, 2.0)
print(f"p = 2: [{est.lower:.8f}, {est.upper:.8f}] (trace norm {nuclear_oracle_p2(v):.8f})")

est = factnorm1(v, e)
print(f"p = 3, random: [{est.lower:.6f}, {est.upper:.6f}], relative gap {est.gap / est.upper:.2%}")
fac = est.info["factorization"]
print(f"best factorization has inner size r = {fac.r}, reconstruction error {fac.reconstruction_error(v):.1e}")
