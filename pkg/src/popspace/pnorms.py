"""Vector, entrywise and operator p-norms.

Operator norms ``||A||_{p->p}`` are NP-hard to compute for general ``p``, so
every operator-norm answer here is a two-sided :class:`NormEstimate`: a lower
bound that is the exact value of ``||Ax||_p / ||x||_p`` at a reported witness,
and an upper bound that follows from a provable inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InputError, InequalityViolation, UnsupportedSizeError

__all__ = [
    "Exponent",
    "NormEstimate",
    "InequalityReport",
    "as_exponent",
    "as_matrix",
    "vec_p_norm",
    "entrywise_norm",
    "holder_dual",
    "opnorm_lower",
    "opnorm_upper",
    "opnorm",
    "opnorm_oracle_small",
    "check_p_comparison",
    "check_opnorm_bounds",
]

DEFAULT_SEED = 42
MAX_POWER_ITER = 500


@dataclass(frozen=True)
class Exponent:
    """A Hölder pair ``(p, p')`` with ``1/p + 1/p' = 1``.

    Only ``p`` is supplied; the conjugate and ``delta = |1/p - 1/p'|`` are
    derived so that the pair can never be inconsistent.
    """

    p: float
    p_conj: float = field(init=False)
    delta: float = field(init=False)

    def __post_init__(self):
        try:
            p = float(self.p)
        except (TypeError, ValueError):
            raise InputError(f"exponent p must be a real number, got {self.p!r}") from None
        if not math.isfinite(p) or p <= 1.0:
            raise InputError(f"exponent p must lie in (1, inf), got {p!r}")
        p_conj = p / (p - 1.0)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_conj", p_conj)
        object.__setattr__(self, "delta", abs(1.0 / p - 1.0 / p_conj))

    @classmethod
    def parse(cls, text: str) -> Exponent:
        """Parse ``"3"``, ``"1.5"`` or the rational form ``"3/2"``."""
        text = str(text).strip()
        try:
            if "/" in text:
                value = float(Fraction(text))
            else:
                value = float(text)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"cannot parse exponent {text!r}") from None
        return cls(value)

    def conjugate(self) -> Exponent:
        return Exponent(self.p_conj)


def as_exponent(e) -> Exponent:
    if isinstance(e, Exponent):
        return e
    if isinstance(e, str):
        return Exponent.parse(e)
    return Exponent(e)


def _as_power(q) -> float:
    """Accept an Exponent (its ``p``) or a raw exponent in [1, inf]."""
    if isinstance(q, Exponent):
        return q.p
    q = float(q)
    if math.isnan(q) or q < 1.0:
        raise InputError(f"norm exponent must lie in [1, inf], got {q!r}")
    return q


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a finite complex 2-D array (the dense matrix carrier)."""
    M = np.asarray(A)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[1] == 0:
        raise InputError(f"{name} must be a nonempty 2-D array, got shape {M.shape}")
    M = M.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def _as_vector(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x).astype(np.complex128, copy=False).ravel()
    if v.size == 0:
        raise InputError(f"{name} must be nonempty")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name} has non-finite entries")
    return v


def _pnorm_abs(a: np.ndarray, q: float, axis=None) -> np.ndarray:
    """q-norm of nonnegative reals ``a`` along ``axis``, scaled against overflow."""
    m = np.max(a, axis=axis, keepdims=True)
    if q == math.inf:
        return np.squeeze(m, axis=axis) if axis is not None else float(m.ravel()[0])
    safe = np.where(m > 0, m, 1.0)
    s = np.sum((a / safe) ** q, axis=axis, keepdims=True) ** (1.0 / q)
    out = (m * s)
    if axis is None:
        return float(out.ravel()[0])
    return np.squeeze(out, axis=axis)


def vec_p_norm(x, p) -> float:
    """``(sum |x_i|^p)^(1/p)``; ``p = inf`` gives ``max |x_i|``."""
    v = _as_vector(x)
    return _pnorm_abs(np.abs(v), _as_power(p))


def entrywise_norm(A, q) -> float:
    """q-norm of all entries of ``A`` taken as one flat vector."""
    M = as_matrix(A)
    return _pnorm_abs(np.abs(M).ravel(), _as_power(q))


def holder_dual(x: np.ndarray, q: float, axis: int = 0) -> np.ndarray:
    """Norming functional of ``x`` in ``l_q``.

    Returns ``a`` with ``||a||_{q'} = 1`` and ``sum(a * x) = ||x||_q``
    (bilinear pairing, no conjugation). Operates column-wise on 2-D input.
    Zero columns map to zero.
    """
    x = np.asarray(x, dtype=np.complex128)
    ax = np.abs(x)
    m = np.max(ax, axis=axis, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    y = ax / safe
    nrm = np.sum(y**q, axis=axis, keepdims=True) ** (1.0 / q)
    phase = np.ones_like(x)
    nz = ax > 0
    # componentwise real division cannot overflow, unlike complex division by tiny |x|
    phase[nz] = x[nz].real / ax[nz] - 1j * (x[nz].imag / ax[nz])
    nrm_safe = np.where(nrm > 0, nrm, 1.0)
    return phase * (y / nrm_safe) ** (q - 1.0)


@dataclass
class NormEstimate:
    """Certified two-sided answer to a norm query.

    ``lower`` is attained by ``witness`` (re-evaluating it reproduces the
    value); ``upper`` follows from a proved inequality. A one-sided estimate
    leaves the other side at ``0`` or ``inf``.
    """

    lower: float = 0.0
    upper: float = math.inf
    witness: Any = None
    method: str = ""
    restarts: int = 0
    tolerance: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def is_consistent(self, rtol: float = 1e-9) -> bool:
        return self.lower <= self.upper * (1.0 + rtol)


@dataclass
class InequalityReport:
    """Outcome of checking one inequality over a batch of cases."""

    name: str
    cases: int = 0
    max_ratio: float = 0.0
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def raise_if_violated(self):
        if self.violations:
            raise InequalityViolation(
                f"{self.name}: {len(self.violations)} violation(s), max ratio {self.max_ratio!r}",
                self,
            )
        return self


# --------------------------------------------------------------------------
# operator norm: lower bounds by the duality-map power method


def _objective(A: np.ndarray, X: np.ndarray, p: float) -> np.ndarray:
    """``||A x||_p / ||x||_p`` for each column x of X."""
    num = _pnorm_abs(np.abs(A @ X), p, axis=0)
    den = _pnorm_abs(np.abs(X), p, axis=0)
    return num / np.where(den > 0, den, 1.0)


def _power_iterate(A, X0, p, tol, maxiter, history=False):
    """Batched nonlinear power method, one column of ``X0`` per start.

    Each step maps ``x -> dual_{p'}(A^T dual_p(A x))``; the objective is
    nondecreasing along every column.
    """
    pc = p / (p - 1.0)
    X = X0 / _pnorm_abs(np.abs(X0), p, axis=0)
    vals = _objective(A, X, p)
    active = np.ones(X.shape[1], dtype=bool)
    hist = [vals.copy()] if history else None
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Xa = X[:, idx]
        Y = A @ Xa
        a = holder_dual(Y, p)
        Z = A.T @ a
        Xn = holder_dual(Z, pc)
        zero = np.all(Xn == 0, axis=0)
        Xn[:, zero] = Xa[:, zero]
        new = _objective(A, Xn, p)
        improved = new >= vals[idx]
        keep = idx[improved]
        X[:, keep] = Xn[:, improved]
        gain = new - vals[idx]
        vals[keep] = new[improved]
        scale = np.where(vals[idx] > 0, vals[idx], 1.0)
        done = (~improved) | (gain <= tol * scale)
        active[idx[done]] = False
        if history:
            hist.append(vals.copy())
    return vals, X, hist


def _starts(cols: int, restarts: int, rng: np.random.Generator) -> np.ndarray:
    basis = np.eye(cols, dtype=np.complex128)
    const = np.ones((cols, 1), dtype=np.complex128)
    rand = rng.standard_normal((cols, restarts)) + 1j * rng.standard_normal((cols, restarts))
    return np.hstack([basis, const, rand])


def opnorm_lower(A, e, restarts: int = 8, tol: float = 1e-12, seed: int = DEFAULT_SEED,
                 maxiter: int = MAX_POWER_ITER, starts=None, history: bool = False) -> NormEstimate:
    """Certified lower bound on ``||A||_{p->p}`` with a maximizing witness.

    Starts are the canonical basis, the constant vector and ``restarts``
    seeded complex Gaussian vectors (plus any extra ``starts`` columns).
    The first start reaching the maximum wins ties.
    """
    e = as_exponent(e)
    A = as_matrix(A)
    if restarts < 1:
        raise InputError(f"restarts must be >= 1, got {restarts}")
    rows, cols = A.shape
    if not np.any(A):
        w = np.zeros(cols, dtype=np.complex128)
        w[0] = 1.0
        return NormEstimate(0.0, math.inf, w, "power-iteration", restarts, tol)
    rng = np.random.default_rng(seed)
    X0 = _starts(cols, restarts, rng)
    if starts is not None:
        X0 = np.hstack([X0, np.asarray(starts, dtype=np.complex128).reshape(cols, -1)])
    vals, X, hist = _power_iterate(A, X0, e.p, tol, maxiter, history)
    best = int(np.argmax(vals))  # first maximizer
    x = X[:, best]
    x = x / vec_p_norm(x, e.p)
    lower = vec_p_norm(A @ x, e.p)
    est = NormEstimate(lower, math.inf, x, "power-iteration", restarts, tol)
    if history:
        est.info["history"] = [h[best] for h in hist]
    return est


# --------------------------------------------------------------------------
# operator norm: certified upper bounds


def _block_components(A: np.ndarray):
    """Independent diagonal blocks of ``A`` (rows, cols) up to permutation."""
    rows, cols = A.shape
    nz = A != 0
    if nz.all():
        return [(np.arange(rows), np.arange(cols))]
    r, c = np.nonzero(nz)
    graph = csr_matrix((np.ones(r.size), (r, rows + c)), shape=(rows + cols, rows + cols))
    ncomp, labels = connected_components(graph, directed=False)
    blocks = []
    for k in range(ncomp):
        members = np.flatnonzero(labels == k)
        br = members[members < rows]
        bc = members[members >= rows] - rows
        if br.size and bc.size:
            blocks.append((br, bc))
    return blocks


def _block_upper(B: np.ndarray, p: float) -> float:
    pc = p / (p - 1.0)
    absB = np.abs(B)
    n1 = absB.sum(axis=0).max()  # ||B||_{1->1}
    ninf = absB.sum(axis=1).max()  # ||B||_{inf->inf}
    bounds = [n1 ** (1.0 / p) * ninf ** (1.0 / pc)]
    U, s, Vh = np.linalg.svd(B, full_matrices=False)
    n2 = s[0]
    if p <= 2.0:
        theta = 2.0 / pc  # 1/p = (1 - theta)/1 + theta/2
        bounds.append(n1 ** (1.0 - theta) * n2**theta)
    else:
        theta = 2.0 / p  # 1/p = theta/2 + (1 - theta)/inf
        bounds.append(n2**theta * ninf ** (1.0 - theta))
    # B = sum_k s_k u_k v_k^H, each rank-one term has norm ||u_k||_p ||v_k||_p'
    bounds.append(float(np.sum(s * _pnorm_abs(np.abs(U), p, axis=0) * _pnorm_abs(np.abs(Vh), pc, axis=1))))
    return float(min(bounds))


def opnorm_upper(A, e) -> float:
    """Certified upper bound on ``||A||_{p->p}``.

    The minimum of three provable bounds, taken per independent diagonal
    block (the norm of a direct sum is the max over blocks):

    * Riesz-Thorin between the 1 and infinity endpoints,
      ``||A||_1^{1/p} ||A||_inf^{1/p'}``;
    * Riesz-Thorin between the 2-endpoint (largest singular value) and the
      nearer of the 1/infinity endpoints;
    * the rank-one expansion ``sum_k s_k ||u_k||_p ||v_k||_{p'}`` of the SVD.
    """
    e = as_exponent(e)
    A = as_matrix(A)
    if not np.any(A):
        return 0.0
    return max(_block_upper(A[np.ix_(br, bc)], e.p) for br, bc in _block_components(A))


def opnorm(A, e, restarts: int = 8, tol: float = 1e-12, seed: int = DEFAULT_SEED) -> NormEstimate:
    """Two-sided estimate: power-method lower bound and certified upper bound."""
    est = opnorm_lower(A, e, restarts=restarts, tol=tol, seed=seed)
    est.upper = opnorm_upper(A, e)
    return est


# --------------------------------------------------------------------------
# brute-force oracle


def _sphere_points(cols: int, angles: np.ndarray, p: float) -> np.ndarray:
    """Map parameter rows to points on the complex unit p-sphere of C^cols.

    For cols = 2 a row is (t, phase2); for cols = 3 it is
    (t, s, phase2, phase3); the first coordinate is kept real.
    """
    if cols == 1:
        return np.ones((1, angles.shape[0]), dtype=np.complex128)
    if cols == 2:
        t, f2 = angles[:, 0], angles[:, 1]
        mags = np.vstack([np.cos(t), np.sin(t)])
        phases = np.vstack([np.ones_like(f2), np.exp(1j * f2)])
    else:
        t, s, f2, f3 = angles.T
        mags = np.vstack([np.cos(t), np.sin(t) * np.cos(s), np.sin(t) * np.sin(s)])
        phases = np.vstack([np.ones_like(f2), np.exp(1j * f2), np.exp(1j * f3)])
    mags = np.abs(mags)
    nrm = np.sum(mags**p, axis=0) ** (1.0 / p)
    return mags / nrm * phases


def opnorm_oracle_small(A, e, grid_density: int = 24, refine_rounds: int = 12, keep: int = 32) -> float:
    """Brute-force ``max ||Ax||_p`` over a grid on the unit p-sphere (cols <= 3).

    An angular grid is evaluated exhaustively, then the ``keep`` best cells
    are repeatedly re-gridded at shrinking radius. Independent of the power
    method; meant as a test oracle only.
    """
    e = as_exponent(e)
    A = as_matrix(A)
    cols = A.shape[1]
    if cols > 3:
        raise UnsupportedSizeError(f"opnorm_oracle_small supports at most 3 columns, got {cols}")
    if cols == 1:
        return vec_p_norm(A[:, 0], e.p)
    half_pi, two_pi = np.pi / 2, 2 * np.pi
    if cols == 2:
        spans = np.array([half_pi, two_pi])
    else:
        spans = np.array([half_pi, half_pi, two_pi, two_pi])
    dim = spans.size
    # magnitude angles include both ends, phases are periodic
    periodic = spans == two_pi
    axes = [np.linspace(0.0, sp, grid_density, endpoint=not per) for sp, per in zip(spans, periodic)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)

    def evaluate(P):
        vals = np.empty(P.shape[0])
        for lo in range(0, P.shape[0], 200_000):
            X = _sphere_points(cols, P[lo:lo + 200_000], e.p)
            vals[lo:lo + 200_000] = _pnorm_abs(np.abs(A @ X), e.p, axis=0)
        return vals

    vals = evaluate(grid)
    order = np.argsort(-vals, kind="stable")[:keep]
    centers, best = grid[order], float(vals[order[0]])
    radius = spans / (grid_density - 1)
    local = np.stack(np.meshgrid(*[np.linspace(-1, 1, 7)] * dim, indexing="ij"), axis=-1).reshape(-1, dim)
    for _ in range(refine_rounds):
        cand = (centers[:, None, :] + local[None, :, :] * radius).reshape(-1, dim)
        cv = evaluate(cand)
        order = np.argsort(-cv, kind="stable")[:keep]
        centers = cand[order]
        best = max(best, float(cv[order[0]]))
        radius = radius / 3.0
    return best


# --------------------------------------------------------------------------
# comparison inequalities


def check_p_comparison(n: int, e, trials: int = 10_000, seed: int = DEFAULT_SEED,
                       samples=None, rtol: float = 1e-12) -> InequalityReport:
    """Sweep ``||x||_p <= n^delta ||x||_{p'}`` over random vectors in C^n.

    Returns the largest observed ratio ``||x||_p / (n^delta ||x||_{p'})``;
    any ratio above ``1 + rtol`` is recorded as a violation.
    """
    e = as_exponent(e)
    if trials < 1:
        raise InputError("trials must be >= 1")
    if samples is None:
        rng = np.random.default_rng(seed)
        samples = rng.standard_normal((n, trials)) + 1j * rng.standard_normal((n, trials))
    X = np.abs(np.asarray(samples, dtype=np.complex128).reshape(n, -1))
    ratios = _pnorm_abs(X, e.p, axis=0) / (n**e.delta * _pnorm_abs(X, e.p_conj, axis=0))
    ratios = np.where(np.isnan(ratios), 0.0, ratios)
    rep = InequalityReport("p-comparison", cases=X.shape[1], max_ratio=float(ratios.max()))
    for j in np.flatnonzero(ratios > 1.0 + rtol):
        rep.violations.append({"index": int(j), "ratio": float(ratios[j]), "vector": X[:, j].tolist()})
    rep.details = {"n": n, "p": e.p, "seed": seed}
    return rep


def check_opnorm_bounds(A, e, restarts: int = 4, seed: int = DEFAULT_SEED,
                        rtol: float = 1e-9) -> InequalityReport:
    """Check both operator-norm vs entrywise-norm bounds on one matrix.

    ``A`` (n x r) is read as ``alpha`` for
    ``||alpha||_{B(l_p^r, l_p^n)} <= ||alpha||_{p'} n^delta`` and its
    transpose (r x n) as ``beta`` for
    ``||beta||_{B(l_p^n, l_p^r)} <= ||beta||_p n^delta``, where n is the row
    count of ``A``. Left sides are certified lower bounds.
    """
    e = as_exponent(e)
    A = as_matrix(A)
    n = A.shape[0]
    scale = n**e.delta
    lhs_a = opnorm_lower(A, e, restarts=restarts, seed=seed).lower
    rhs_a = entrywise_norm(A, e.p_conj) * scale
    lhs_b = opnorm_lower(A.T, e, restarts=restarts, seed=seed).lower
    rhs_b = entrywise_norm(A.T, e.p) * scale
    ratios = [lhs_a / rhs_a if rhs_a > 0 else 0.0, lhs_b / rhs_b if rhs_b > 0 else 0.0]
    rep = InequalityReport("opnorm-bounds", cases=2, max_ratio=max(ratios))
    rep.details = {"alpha": (lhs_a, rhs_a), "beta": (lhs_b, rhs_b), "n": n, "p": e.p}
    for side, r, l, u in (("alpha", ratios[0], lhs_a, rhs_a), ("beta", ratios[1], lhs_b, rhs_b)):
        if r > 1.0 + rtol:
            rep.violations.append({"side": side, "lower": l, "bound": u, "matrix": A.tolist()})
    return rep
