"""Column norms over subspaces of l_p^m and the maps phi / psi.

A subspace ``E`` of ``l_p^m`` is carried by a basis matrix ``B`` (m x k).
The column structure on ``E`` gives an n x n matrix ``X = [xi_ij]`` of
vectors in ``E`` the norm

    ||X||^p = sup { sum_i ||sum_j lam_j xi_ij||_p^p : ||lam||_p <= 1 },

which is the p -> p operator norm of the stacked (n m) x n matrix with
entries ``xi_ij[a]`` at row ``(i, a)`` and column ``j``.

Operators on ``C (+)_p E`` are represented on the larger space
``C (+)_p l_p^m = l_p^{m+1}`` as (m+1) x (m+1) matrices, coordinate 0 being
the scalar part. ``phi(xi)`` sends ``(lam, e)`` to ``(0, lam xi)`` and
``psi(T)`` reads off the E-part of ``T (1, 0)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

from .errors import InputError, StructuralError
from .pnorms import (
    DEFAULT_SEED,
    InequalityReport,
    NormEstimate,
    as_exponent,
    as_matrix,
    holder_dual,
    opnorm_lower,
    opnorm_upper,
    vec_p_norm,
)

__all__ = [
    "SubspaceEmbedding",
    "ColumnMatrix",
    "col_matrix_norm",
    "check_column_embedding_isometry",
    "phi_apply",
    "phi_operator",
    "psi_apply",
    "phi_amplified",
    "psi_amplified",
    "check_phi_psi_contractive",
    "ProjectionResult",
    "projection_constant",
    "counterexample_report",
    "random_subspace",
]

MEMBERSHIP_RTOL = 1e-10
CONTRACTION_TOL = 1e-6


class SubspaceEmbedding:
    """A k-dimensional subspace of ``l_p^m`` given by basis columns."""

    def __init__(self, basis, e):
        self.e = as_exponent(e)
        B = as_matrix(basis, "basis")
        m, k = B.shape
        if k > m:
            raise InputError(f"basis has more columns ({k}) than the ambient dimension ({m})")
        s = np.linalg.svd(B, compute_uv=False)
        if s[0] == 0 or s[-1] <= 1e-10 * s[0]:
            raise InputError("basis columns are linearly dependent")
        self.basis = B
        self._pinv = np.linalg.pinv(B)

    @property
    def m(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def residual(self, x) -> float:
        """Relative distance of ``x`` from the subspace (Euclidean)."""
        x = np.asarray(x, dtype=np.complex128)
        nx = np.linalg.norm(x)
        if nx == 0:
            return 0.0
        return float(np.linalg.norm(x - self.basis @ (self._pinv @ x)) / nx)

    def contains(self, x, tol: float = MEMBERSHIP_RTOL) -> bool:
        return self.residual(x) <= tol

    def element(self, coeffs) -> np.ndarray:
        return self.basis @ np.asarray(coeffs, dtype=np.complex128)


@dataclass
class ColumnMatrix:
    """``entries[i, j]`` is the ambient vector ``xi_ij`` (shape (n, n, m))."""

    entries: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.entries, dtype=np.complex128)
        if X.ndim != 3 or X.shape[0] != X.shape[1]:
            raise InputError(f"column matrix must have shape (n, n, m), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InputError("column matrix has non-finite entries")
        self.entries = X

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[2]

    def check_in(self, E: SubspaceEmbedding, tol: float = MEMBERSHIP_RTOL) -> None:
        if self.m != E.m:
            raise InputError(f"entries have length {self.m}, subspace lives in dimension {E.m}")
        for i in range(self.n):
            for j in range(self.n):
                if not E.contains(self.entries[i, j], tol):
                    raise InputError(f"entry ({i}, {j}) is not in the subspace")

    def stacked(self) -> np.ndarray:
        """The (n m) x n matrix whose p -> p norm is the column norm."""
        n, _, m = self.entries.shape
        return self.entries.transpose(0, 2, 1).reshape(n * m, n)

    @classmethod
    def from_coeffs(cls, E: SubspaceEmbedding, C) -> ColumnMatrix:
        """Build from basis coefficients ``C`` of shape (n, n, k)."""
        C = np.asarray(C, dtype=np.complex128)
        return cls(np.einsum("ak,ijk->ija", E.basis, C))


def col_matrix_norm(X: ColumnMatrix, e, restarts: int = 8, seed: int = DEFAULT_SEED) -> NormEstimate:
    """Two-sided estimate of the column norm of ``X``.

    The lower bound comes from the power method on the stacked matrix with
    all canonical ``lam`` among its starts; the witness is ``lam``.
    """
    e = as_exponent(e)
    if not isinstance(X, ColumnMatrix):
        X = ColumnMatrix(X)
    M = X.stacked()
    est = opnorm_lower(M, e, restarts=restarts, seed=seed)
    est.upper = opnorm_upper(M, e)
    est.method = "column-norm"
    return est


def _column_objective(X: ColumnMatrix, lam: np.ndarray, p: float) -> float:
    """``(sum_i ||sum_j lam_j xi_ij||_p^p)^(1/p)`` for a unit ``lam``, evaluated row by row."""
    total = 0.0
    for i in range(X.n):
        total += vec_p_norm(np.tensordot(lam, X.entries[i], axes=(0, 0)), p) ** p
    return total ** (1.0 / p)


def check_column_embedding_isometry(E: SubspaceEmbedding, n: int, trials: int = 100,
                                    seed: int = DEFAULT_SEED, tol: float = 1e-9) -> InequalityReport:
    """Consistency of the column norm computed inside ``E`` and in ``l_p^m``.

    For each sample the estimate from the stacked ambient matrix is compared
    with a direct evaluation of the defining supremum at the same witness
    (norms of E computed as ambient norms). Deviations above ``tol`` are
    reported as violations.
    """
    e = E.e
    rng = np.random.default_rng(seed)
    rep = InequalityReport("column-embedding-isometry")
    worst = 0.0
    for t in range(trials):
        C = rng.standard_normal((n, n, E.k)) + 1j * rng.standard_normal((n, n, E.k))
        X = ColumnMatrix.from_coeffs(E, C)
        est = col_matrix_norm(X, e, restarts=2, seed=seed + t)
        direct = _column_objective(X, est.witness, e.p)
        dev = abs(direct - est.lower) / max(est.lower, np.finfo(float).tiny)
        worst = max(worst, dev)
        rep.cases += 1
        if dev > tol:
            rep.violations.append({"trial": t, "embedded": est.lower, "intrinsic": direct})
    rep.max_ratio = worst
    rep.details = {"n": n, "p": e.p, "max_relative_deviation": worst}
    return rep


# --------------------------------------------------------------------------
# phi and psi


def phi_apply(xi, lam: complex, evec=None):
    """Action of ``T_xi`` on ``lam (+) evec``: returns ``(0, lam xi)``."""
    xi = np.asarray(xi, dtype=np.complex128)
    return 0.0, lam * xi


def phi_operator(xi) -> np.ndarray:
    """``T_xi`` as an (m+1) x (m+1) matrix on ``C (+)_p l_p^m``."""
    xi = np.asarray(xi, dtype=np.complex128)
    T = np.zeros((xi.size + 1, xi.size + 1), dtype=np.complex128)
    T[1:, 0] = xi
    return T


def psi_apply(T, E: SubspaceEmbedding | None = None, tol: float = MEMBERSHIP_RTOL) -> np.ndarray:
    """E-part of ``T (1 (+) 0)``.

    The image is read straight from column 0 of ``T``, so no arithmetic
    touches it. When ``E`` is given and the result falls outside ``E``
    (``T`` not block compatible) a warning is issued and the vector is
    returned unchanged.
    """
    T = np.asarray(T, dtype=np.complex128)
    y = T[1:, 0].copy()
    if E is not None and not E.contains(y, tol):
        warnings.warn("psi: T(1 (+) 0) leaves the subspace; returned as-is", RuntimeWarning, stacklevel=2)
    return y


def phi_amplified(X: ColumnMatrix) -> np.ndarray:
    """``phi_n(X)`` as an operator on ``l_p^n(C (+)_p l_p^m)``."""
    n, m = X.n, X.m
    big = np.zeros((n * (m + 1), n * (m + 1)), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            big[i * (m + 1):(i + 1) * (m + 1), j * (m + 1):(j + 1) * (m + 1)] = phi_operator(X.entries[i, j])
    return big


def psi_amplified(T, n: int, m: int) -> ColumnMatrix:
    """``psi_n`` applied blockwise to an ``n (m+1)`` square operator matrix."""
    T = np.asarray(T, dtype=np.complex128)
    out = np.zeros((n, n, m), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            out[i, j] = psi_apply(T[i * (m + 1):(i + 1) * (m + 1), j * (m + 1):(j + 1) * (m + 1)])
    return ColumnMatrix(out)


def _block_operator(E: SubspaceEmbedding, n: int, rng: np.random.Generator) -> np.ndarray:
    """Random operator on ``l_p^n(C (+) l_p^m)`` whose blocks send ``1 (+) 0`` into ``E``."""
    m, k = E.m, E.k
    d = n * (m + 1)
    T = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    for i in range(n):
        for j in range(n):
            c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
            T[i * (m + 1) + 1:(i + 1) * (m + 1), j * (m + 1)] = E.element(c)
    return T


def check_phi_psi_contractive(E: SubspaceEmbedding, n_max: int = 3, trials: int = 50,
                              seed: int = DEFAULT_SEED, tol: float = CONTRACTION_TOL,
                              restarts: int = 4) -> InequalityReport:
    """Sweep the contraction properties of ``phi_n`` and ``psi_n`` for n = 1..n_max.

    A violation needs a certified lower bound of the image norm above the
    certified upper bound of the input norm times ``1 + tol``. The
    round trip ``psi_n(phi_n(X)) == X`` is checked for exact equality.
    """
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    e = E.e
    rep = InequalityReport("phi-psi-contractive")
    roundtrip_dev = 0.0
    worst = {"phi": 0.0, "psi": 0.0}
    slack = {"phi": 0.0, "psi": 0.0}
    for n in range(1, n_max + 1):
        for t in range(trials):
            rng = np.random.default_rng([seed, n, t])
            C = rng.standard_normal((n, n, E.k)) + 1j * rng.standard_normal((n, n, E.k))
            X = ColumnMatrix.from_coeffs(E, C)
            PX = phi_amplified(X)
            back = psi_amplified(PX, n, E.m)
            if not np.array_equal(back.entries, X.entries):
                roundtrip_dev = max(roundtrip_dev, float(np.abs(back.entries - X.entries).max()))
                rep.violations.append({"kind": "roundtrip", "n": n, "trial": t})
            x_upper = col_matrix_norm(X, e, restarts, seed).upper
            img_lower = opnorm_lower(PX, e, restarts=restarts, seed=seed).lower
            T = _block_operator(E, n, rng)
            t_upper = opnorm_upper(T, e)
            psi_lower = col_matrix_norm(psi_amplified(T, n, E.m), e, restarts, seed).lower
            for kind, lo, up in (("phi", img_lower, x_upper), ("psi", psi_lower, t_upper)):
                ratio = lo / up if up > 0 else 0.0
                worst[kind] = max(worst[kind], ratio)
                slack[kind] = max(slack[kind], up - lo)
                rep.cases += 1
                if ratio > 1.0 + tol:
                    rep.violations.append({"kind": kind, "n": n, "trial": t, "lower": lo, "upper": up})
    rep.max_ratio = max(worst.values())
    rep.details = {
        "p": e.p,
        "n_max": n_max,
        "trials": trials,
        "max_ratio_phi": worst["phi"],
        "max_ratio_psi": worst["psi"],
        "max_estimator_gap_phi": slack["phi"],
        "max_estimator_gap_psi": slack["psi"],
        "roundtrip_max_deviation": roundtrip_dev,
    }
    return rep


# --------------------------------------------------------------------------
# projections onto E


@dataclass
class ProjectionResult:
    """Best projection found onto ``E`` and the certified upper bound of its norm."""

    value: float
    P: np.ndarray
    lower: float
    starts: int
    values: list = field(default_factory=list)
    idempotency_error: float = 0.0
    range_error: float = 0.0


def _hahn_banach_functional(b: np.ndarray, p: float) -> np.ndarray:
    """Functional ``g`` with ``g b = 1`` and ``||g||_{p'} = 1 / ||b||_p``."""
    return holder_dual(b, p) / vec_p_norm(b, p)


def projection_constant(E: SubspaceEmbedding, restarts: int = 32, iterations: int = 200,
                        seed: int = DEFAULT_SEED) -> ProjectionResult:
    """Smallest certified upper bound on ``||P||_{p->p}`` over projections onto ``E``.

    Projections are ``P = B G`` with ``G = B^+ + Z N``, where the rows of
    ``N`` are an orthonormal basis of the left null space of ``B``; every
    projection with range ``E`` has this form. Each start (``Z = 0``, the
    Hahn-Banach functional when k = 1, then seeded Gaussian ``Z``) is refined
    by Nelder-Mead for ``iterations`` steps on the real-packed ``Z``; the
    smallest value wins, the first start winning ties.
    """
    e = E.e
    B = E.basis
    m, k = B.shape
    Bp = np.linalg.pinv(B)
    if k == m:
        P = np.eye(m, dtype=np.complex128)
        return ProjectionResult(1.0, P, 1.0, 0, [1.0])
    N = null_space(B.conj().T).conj().T  # (m-k) x m, N B = 0, N N^H = I
    shape = (k, m - k)
    size = k * (m - k)

    def build(z):
        Z = z[:size].reshape(shape) + 1j * z[size:].reshape(shape)
        return B @ (Bp + Z @ N)

    def objective(z):
        return opnorm_upper(build(z), e)

    def pack(Z):
        return np.concatenate([Z.real.ravel(), Z.imag.ravel()])

    starts = [np.zeros(2 * size)]
    if k == 1:
        g = _hahn_banach_functional(B[:, 0], e.p)[None, :]
        starts.append(pack((g - Bp) @ N.conj().T))
    rng = np.random.default_rng(seed)
    while len(starts) < restarts:
        starts.append(0.5 * rng.standard_normal(2 * size))
    values = []
    best_z, best = None, math.inf
    for z0 in starts:
        res = minimize(objective, z0, method="Nelder-Mead",
                       options={"maxiter": iterations, "xatol": 1e-10, "fatol": 1e-13})
        z, val = (res.x, res.fun) if res.fun <= objective(z0) else (z0, objective(z0))
        values.append(float(val))
        if val < best:
            best_z, best = z, val
    # restarting the simplex at the winner until it stalls tightens the minimum
    for _ in range(8):
        res = minimize(objective, best_z, method="Nelder-Mead",
                       options={"maxiter": 2 * iterations, "xatol": 1e-12, "fatol": 1e-14})
        if res.fun >= best * (1.0 - 1e-12):
            break
        best_z, best = res.x, res.fun
    P = build(best_z)
    value = opnorm_upper(P, e)
    idem = float(np.abs(P @ P - P).max())
    rng_err = float(np.abs(P @ B - B).max() / max(np.abs(B).max(), np.finfo(float).tiny))
    if idem > 1e-10 * max(1.0, np.abs(P).max()) or rng_err > 1e-10:
        raise StructuralError("projection search produced a non-projection",
                              {"idempotency": idem, "range": rng_err})
    lower = opnorm_lower(P, e, restarts=4, seed=seed).lower
    return ProjectionResult(float(value), P, float(lower), len(starts), values, idem, rng_err)


def random_subspace(m: int, k: int, e, rng: np.random.Generator, orthonormal: bool = False) -> SubspaceEmbedding:
    """Subspace spanned by ``k`` complex Gaussian vectors in ``C^m``."""
    B = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
    if orthonormal:
        B, _ = np.linalg.qr(B)
    return SubspaceEmbedding(B, e)


def counterexample_report(E: SubspaceEmbedding, n_max: int = 3, trials: int = 20, restarts: int = 32,
                          iterations: int = 200, seed: int = DEFAULT_SEED, margin: float = 1e-6) -> dict:
    """Contraction checks for phi / psi together with the best projection onto ``E``.

    ``flags`` states what was observed: whether ``psi o phi`` was the
    identity, whether the contraction sweep found violations, and whether
    the best projection found has norm within ``margin`` of 1 (the subspace
    is then 1-complemented) or above it (an observed obstruction; the
    search is not exhaustive, so this is not a proof).
    """
    rep = check_phi_psi_contractive(E, n_max, trials, seed)
    proj = projection_constant(E, restarts, iterations, seed)
    flags = []
    roundtrip_ok = rep.details["roundtrip_max_deviation"] == 0.0 and not any(
        v["kind"] == "roundtrip" for v in rep.violations)
    flags.append("psi-phi-identity" if roundtrip_ok else "psi-phi-mismatch")
    flags.append("phi-psi-contractive" if rep.passed else "phi-psi-violation")
    if proj.value <= 1.0 + margin:
        flags.append("1-complemented, no obstruction")
    else:
        flags.append("no norm-one projection found (observed obstruction)")
    return {
        "p": E.e.p,
        "m": E.m,
        "k": E.k,
        "phiPsi": {
            "cases": rep.cases,
            "violations": rep.violations,
            "maxRatio": rep.max_ratio,
            **rep.details,
        },
        "projection": {
            "bestValue": proj.value,
            "lowerOfBest": proj.lower,
            "margin": proj.value - 1.0,
            "P": proj.P,
            "startValues": proj.values,
            "idempotencyError": proj.idempotency_error,
            "rangeError": proj.range_error,
        },
        "flags": flags,
    }
