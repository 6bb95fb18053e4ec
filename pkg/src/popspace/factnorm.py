"""Factorization norms on n x n scalar matrices.

``||v||_{1,n}`` is the infimum of ``||alpha||_{p'} ||w|| ||beta||_p`` over
factorizations ``v = alpha @ w @ beta`` (``alpha`` n x r, ``w`` r x r with its
``l_p`` operator norm, ``beta`` r x n). Its dual norm is the operator norm on
``l_p^n`` under the bilinear pairing ``<f, v> = sum f_ij v_ij``, which gives
certified lower bounds ``|<f, v>| / opnorm_upper(f)``.

``||v||_{2,n}`` restricts the factors to full-rank l_p-polar decomposable
ones; since square invertible factors already realize every such value, the
search runs over invertible n x n ``alpha`` and ``beta``.

Upper bounds are always values of explicit factorizations that reproduce
``v``, with ``||w||`` replaced by its certified upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import minimize

from ._search import random_descent
from .errors import InputError
from .pnorms import (
    DEFAULT_SEED,
    InequalityReport,
    NormEstimate,
    as_exponent,
    as_matrix,
    entrywise_norm,
    holder_dual,
    opnorm_lower,
    opnorm_upper,
    vec_p_norm,
)

__all__ = [
    "Factorization",
    "DualWitness",
    "make_factorization",
    "dual_witness",
    "trivial_factorization",
    "factnorm1_upper",
    "factnorm1_lower",
    "factnorm1",
    "factnorm2_upper",
    "nuclear_oracle_p2",
    "direct_sum_combine",
    "sum_combine",
    "check_norm_lower_inequality",
]

RECON_RTOL = 1e-8


@dataclass
class Factorization:
    """``v = alpha @ w @ beta`` together with its certified value."""

    alpha: np.ndarray
    w: np.ndarray
    beta: np.ndarray
    value: float
    p: float

    @property
    def r(self) -> int:
        return self.w.shape[0]

    def product(self) -> np.ndarray:
        return self.alpha @ self.w @ self.beta

    def reconstruction_error(self, v) -> float:
        v = np.asarray(v, dtype=np.complex128)
        scale = max(np.abs(v).max(), np.finfo(float).tiny)
        return float(np.abs(self.product() - v).max() / scale)

    def scaled(self, c: complex) -> Factorization:
        """Factorization of ``c v``, obtained by rescaling ``w``."""
        return make_factorization(self.alpha, c * self.w, self.beta, self.p)


def make_factorization(alpha, w, beta, e) -> Factorization:
    e = as_exponent(e)
    alpha = np.asarray(alpha, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    beta = np.asarray(beta, dtype=np.complex128)
    if alpha.shape[1] != w.shape[0] or w.shape[1] != beta.shape[0] or w.shape[0] != w.shape[1]:
        raise InputError(f"incompatible factor shapes {alpha.shape}, {w.shape}, {beta.shape}")
    na = entrywise_norm(alpha, e.p_conj) if np.any(alpha) else 0.0
    nb = entrywise_norm(beta, e.p) if np.any(beta) else 0.0
    nw = opnorm_upper(w, e)
    return Factorization(alpha, w, beta, na * nw * nb, e.p)


@dataclass
class DualWitness:
    """A matrix ``f`` with ``|<f, v>| / fOpUpper <= ||v||_{1,n}``."""

    f: np.ndarray
    pairing: float
    f_op_upper: float

    @property
    def bound(self) -> float:
        return self.pairing / self.f_op_upper if self.f_op_upper > 0 else 0.0


def dual_witness(f, v, e) -> DualWitness:
    f = as_matrix(f, "f")
    v = np.asarray(v, dtype=np.complex128)
    return DualWitness(f, float(abs(np.sum(f * v))), opnorm_upper(f, e))


def trivial_factorization(v, e) -> Factorization:
    n = v.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    return make_factorization(eye, v, eye, e)


def nuclear_oracle_p2(v) -> float:
    """Sum of singular values (the value of ``||v||_{1,n}`` at p = 2)."""
    return float(np.sum(np.linalg.svd(as_matrix(v), compute_uv=False)))


def _square(v) -> np.ndarray:
    v = as_matrix(v, "v")
    if v.shape[0] != v.shape[1]:
        raise InputError(f"v must be square, got shape {v.shape}")
    return v


def _normalizer(v: np.ndarray) -> complex:
    """Complex scalar c with ``v / c`` having largest entry exactly 1.

    Searching on ``v / c`` makes the estimators equivariant under
    ``v -> c v``.
    """
    flat = v.ravel()
    k = int(np.argmax(np.abs(flat)))
    return complex(flat[k])


# --------------------------------------------------------------------------
# dyadic factorizations (w = I)


def _from_atoms(v, gamma, X, Y, e) -> Factorization:
    """Factorization with ``w = I`` from ``v ~ sum_k gamma_k x_k y_k^T``.

    Columns are rebalanced so that ``||alpha||_{p'} ||beta||_p`` equals
    ``sum |gamma_k|``; whatever residual remains is absorbed row by row as
    extra atoms ``e_i (v - alpha beta)_i``.
    """
    n = v.shape[0]
    keep = np.abs(gamma) > 1e-15 * max(np.abs(gamma).max(initial=0.0), 1e-300)
    s = np.abs(gamma[keep])
    Xk = X[:, keep] * (gamma[keep] / s)
    alpha = Xk * s ** (1.0 / e.p_conj)
    beta = (Y[:, keep] * s ** (1.0 / e.p)).T
    R = v - alpha @ beta
    extra_a, extra_b = [], []
    for i in range(n):
        ri = vec_p_norm(R[i], e.p) if np.any(R[i]) else 0.0
        if ri > 0:
            col = np.zeros(n, dtype=np.complex128)
            col[i] = ri ** (1.0 / e.p_conj)
            extra_a.append(col)
            extra_b.append(R[i] / ri * ri ** (1.0 / e.p))
    if extra_a:
        alpha = np.hstack([alpha, np.array(extra_a).T])
        beta = np.vstack([beta, np.array(extra_b)])
    r = alpha.shape[1]
    if r < n:
        alpha = np.hstack([alpha, np.zeros((n, n - r))])
        beta = np.vstack([beta, np.zeros((n - r, n))])
        r = n
    return make_factorization(alpha, np.eye(r), beta, e)


def _pow_grad(Z: np.ndarray, q: float) -> np.ndarray:
    """Gradient of ``sum |Z_ij|^q / q`` as a complex array (``|z|^(q-2) z``)."""
    a = np.abs(Z)
    g = np.zeros_like(Z)
    nz = a > 0
    g[nz] = a[nz] ** (q - 2.0) * Z[nz]
    return g


def _dyadic_search(v, e, r: int, rng: np.random.Generator, outer: int = 30, inner: int = 300,
                   rho: float = 10.0, noise: float = 0.05):
    """Minimize ``||X||_{p'}^{p'}/p' + ||Y||_p^p/p`` subject to ``X Y^T = v``.

    By Young's inequality the minimum equals the smallest
    ``||alpha||_{p'} ||beta||_p`` over ``v = alpha beta`` with ``r`` inner
    columns (``w = I``). Solved by an augmented Lagrangian with L-BFGS
    inner steps, started from the SVD split plus seeded noise. Returns
    ``(X, Y, multiplier)``; the multiplier is a dual-matrix candidate.
    """
    n = v.shape[0]
    p, pc = e.p, e.p_conj
    U, s, Vh = np.linalg.svd(v)
    X = np.zeros((n, r), dtype=np.complex128)
    Y = np.zeros((n, r), dtype=np.complex128)
    k = min(n, r)
    X[:, :k] = (U * np.sqrt(s))[:, :k]
    Y[:, :k] = (np.sqrt(s)[:, None] * Vh).T[:, :k]
    X += noise * (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r)))
    Y += noise * (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r)))
    size = n * r

    def pack(X, Y):
        return np.concatenate([X.real.ravel(), X.imag.ravel(), Y.real.ravel(), Y.imag.ravel()])

    def unpack(z):
        X = z[:size].reshape(n, r) + 1j * z[size:2 * size].reshape(n, r)
        Y = z[2 * size:3 * size].reshape(n, r) + 1j * z[3 * size:].reshape(n, r)
        return X, Y

    def lagrangian(z, lam, rho):
        X, Y = unpack(z)
        R = X @ Y.T - v
        val = (np.sum(np.abs(X) ** pc) / pc + np.sum(np.abs(Y) ** p) / p
               + np.real(np.vdot(lam, R)) + 0.5 * rho * np.sum(np.abs(R) ** 2))
        M = rho * R + lam
        return val, pack(_pow_grad(X, pc) + M @ Y.conj(), _pow_grad(Y, p) + M.T @ X.conj())

    z = pack(X, Y)
    lam = np.zeros_like(v)
    for _ in range(outer):
        res = minimize(lagrangian, z, args=(lam, rho), jac=True, method="L-BFGS-B",
                       options={"maxiter": inner, "gtol": 1e-12, "ftol": 1e-15})
        z = res.x
        X, Y = unpack(z)
        R = X @ Y.T - v
        lam = lam + rho * R
        if np.abs(R).max() < 1e-12:
            break
    X, Y = unpack(z)
    return X, Y, lam


def _polish(v, fac: Factorization, e, restarts: int, iters: int, seed: int) -> Factorization:
    """Local search in the ``(alpha, beta)`` parametrization with ``w = alpha^+ v beta^+``.

    Only factorizations reproducing ``v`` are accepted; ``||alpha||_{p'}``
    and ``||beta||_p`` are balanced after every accepted step.
    """
    if iters <= 0 or restarts <= 0:
        return fac

    def value(point):
        a, b = point
        w = np.linalg.pinv(a) @ v @ np.linalg.pinv(b)
        if np.abs(a @ w @ b - v).max() > RECON_RTOL * np.abs(v).max():
            return math.inf
        return entrywise_norm(a, e.p_conj) * opnorm_upper(w, e) * entrywise_norm(b, e.p)

    def balance(point):
        a, b = point
        t = math.sqrt(entrywise_norm(b, e.p) / entrywise_norm(a, e.p_conj))
        return [a * t, b / t]

    start = [fac.alpha, fac.beta]
    if not np.isfinite(value(start)):
        return fac
    best = fac
    for k in range(restarts):
        rng = np.random.default_rng([seed, k])
        (a, b), val, _ = random_descent(value, balance(start), rng, iters, step=0.05, renormalize=balance)
        if val < best.value:
            cand = make_factorization(a, np.linalg.pinv(a) @ v @ np.linalg.pinv(b), b, e)
            if cand.reconstruction_error(v) <= RECON_RTOL and cand.value < best.value:
                best = cand
    return best


def _svd_split(v, e) -> Factorization:
    U, s, Vh = np.linalg.svd(v)
    r = np.sqrt(s)
    return make_factorization(U * r, np.eye(v.shape[0]), r[:, None] * Vh, e)


def _upper_candidates(v, e, rmax, restarts, seed, outer):
    n = v.shape[0]
    cands = [trivial_factorization(v, e), _svd_split(v, e)]
    duals = []
    sizes = [n] + ([min(n * n, rmax)] if min(n * n, rmax) > n else [])
    for k in range(max(restarts, 1)):
        r = sizes[k % len(sizes)]
        X, Y, lam = _dyadic_search(v, e, r, np.random.default_rng([seed, 1000 + k]), outer=outer)
        cands.append(_from_atoms(v, np.ones(r), X, Y, e))
        duals.extend([lam.conj(), lam])
    ok = [c for c in cands if c.r <= rmax and c.reconstruction_error(v) <= RECON_RTOL]
    best = min(ok, key=lambda c: c.value)  # first minimizer on ties
    return best, duals


def factnorm1_upper(v, e, rmax: int | None = None, restarts: int = 2, seed: int = DEFAULT_SEED,
                    outer: int = 30, polish_iters: int = 20, _duals_out=None) -> NormEstimate:
    """Certified upper bound on ``||v||_{1,n}`` and the factorization attaining it.

    The best of the trivial factorization ``I v I``, the SVD split, and
    ``restarts`` seeded dyadic searches (inner sizes alternating between
    ``n`` and ``min(n^2, rmax)``), refined by seeded local search in the
    ``(alpha, beta)`` parametrization. ``rmax`` defaults to ``n^2``.
    """
    e = as_exponent(e)
    v = _square(v)
    n = v.shape[0]
    rmax = n * n if rmax is None else int(rmax)
    if rmax < n:
        raise InputError(f"rmax must be >= n = {n}, got {rmax}")
    if not np.any(v):
        fac = trivial_factorization(v, e)
        return NormEstimate(0.0, 0.0, fac, "factorization-search", restarts, RECON_RTOL, {"bestR": n})
    c = _normalizer(v)
    vs = v / c
    best, duals = _upper_candidates(vs, e, rmax, restarts, seed, outer)
    best = _polish(vs, best, e, restarts, polish_iters, seed)
    fac = best.scaled(c)
    if _duals_out is not None:
        _duals_out.extend(d / c for d in duals)
    return NormEstimate(0.0, fac.value, fac, "factorization-search", restarts, RECON_RTOL, {"bestR": fac.r})


def _lower_candidates(v, e, restarts, seed, ascent_iters):
    n = v.shape[0]
    cands = [np.eye(n, dtype=np.complex128)]
    U, s, Vh = np.linalg.svd(v)
    cands.append((Vh.conj().T @ U.conj().T).T)  # maximizes the pairing at p = 2
    for k in range(n):
        a = holder_dual(U[:, k], e.p_conj)
        b = holder_dual(Vh[k], e.p)
        cands.append(np.outer(a, b))
    rng = np.random.default_rng(seed)

    def neg_bound(point):
        ub = opnorm_upper(point[0], e)
        return -abs(np.sum(point[0] * v)) / ub if ub > 0 else 0.0

    for k in range(restarts):
        f0 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        (f,), _, _ = random_descent(neg_bound, [f0], np.random.default_rng([seed, k]), ascent_iters)
        cands.append(f)
    return cands


def factnorm1_lower(v, e, restarts: int = 4, seed: int = DEFAULT_SEED, outer: int = 30,
                    ascent_iters: int = 30, extra=None) -> NormEstimate:
    """Certified lower bound on ``||v||_{1,n}`` by dual pairing.

    Candidates: the identity, the unitary polar factor of ``v``, Hölder-dual
    rank-one matrices built from each singular pair, seeded random matrices
    refined by ascent, and the Lagrange multipliers of the dyadic search
    (pass ``extra`` to reuse those of an upper-bound run). Each ``f`` is
    scored by ``|<f, v>| / opnorm_upper(f)``; the best one is refined by a
    final ascent.
    """
    e = as_exponent(e)
    v = _square(v)
    if not np.any(v):
        f = np.eye(v.shape[0], dtype=np.complex128)
        return NormEstimate(0.0, math.inf, dual_witness(f, v, e), "dual-pairing", restarts, 0.0)
    cands = _lower_candidates(v, e, restarts, seed, ascent_iters)
    if extra is None:
        c = _normalizer(v)
        _, _, lam = _dyadic_search(v / c, e, v.shape[0], np.random.default_rng([seed, 1000]), outer=outer)
        extra = [lam.conj() / c, lam / c]
    cands.extend(extra)
    best = None
    for f in cands:
        if not np.all(np.isfinite(f)) or not np.any(f):
            continue
        dw = dual_witness(f, v, e)
        if best is None or dw.bound > best.bound:
            best = dw
    if ascent_iters > 0:
        def neg_bound(point):
            ub = opnorm_upper(point[0], e)
            return -abs(np.sum(point[0] * v)) / ub if ub > 0 else 0.0

        (f,), _, _ = random_descent(neg_bound, [best.f], np.random.default_rng([seed, 7]), ascent_iters,
                                    step=0.02)
        dw = dual_witness(f, v, e)
        if dw.bound > best.bound:
            best = dw
    return NormEstimate(best.bound, math.inf, best, "dual-pairing", restarts, 0.0)


def factnorm1(v, e, rmax: int | None = None, restarts: int = 2, seed: int = DEFAULT_SEED,
              outer: int = 30, polish_iters: int = 20, ascent_iters: int = 30) -> NormEstimate:
    """Sandwich ``lower <= ||v||_{1,n} <= upper``.

    ``witness`` holds the dual matrix, ``info['factorization']`` the best
    factorization.
    """
    duals: list = []
    up = factnorm1_upper(v, e, rmax, restarts, seed, outer, polish_iters, _duals_out=duals)
    lo = factnorm1_lower(v, e, restarts, seed, outer, ascent_iters, extra=duals)
    est = NormEstimate(lo.lower, up.upper, lo.witness, "factorization-search+dual-pairing",
                       restarts, RECON_RTOL)
    est.info = {"factorization": up.witness, "bestR": up.info["bestR"]}
    return est


# --------------------------------------------------------------------------
# polar-restricted norm


def factnorm2_upper(v, e, restarts: int = 4, seed: int = DEFAULT_SEED, iters: int = 60,
                    cond_max: float = 1e12) -> NormEstimate:
    """Certified upper bound on ``||v||_{2,n}`` over invertible square factors.

    Minimizes ``||a||_{p'} opnorm_upper(a^-1 v b^-1) ||b||_p`` over seeded
    invertible pairs ``(a, b)``; ill-conditioned candidates are skipped.
    """
    e = as_exponent(e)
    v = _square(v)
    n = v.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    if not np.any(v):
        fac = make_factorization(eye, v, eye, e)
        return NormEstimate(0.0, 0.0, fac, "factorization-search", restarts, RECON_RTOL, {"bestR": n})
    c = _normalizer(v)
    vs = v / c

    def value(point):
        a, b = point
        if np.linalg.cond(a) > cond_max or np.linalg.cond(b) > cond_max:
            return math.inf
        w = np.linalg.solve(a, vs) @ np.linalg.inv(b)
        return entrywise_norm(a, e.p_conj) * opnorm_upper(w, e) * entrywise_norm(b, e.p)

    def balance(point):
        a, b = point
        t = math.sqrt(entrywise_norm(b, e.p) / entrywise_norm(a, e.p_conj))
        return [a * t, b / t]

    U, s, Vh = np.linalg.svd(vs)
    reg = np.sqrt(s + 1e-3 * s[0])
    starts = [[eye, eye], [U * reg, reg[:, None] * Vh]]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        starts.append([eye + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))),
                       eye + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))])
    best_pt, best_val = None, math.inf
    for k, st in enumerate(starts):
        if not np.isfinite(value(st)):
            continue
        pt, val, _ = random_descent(value, balance(st), np.random.default_rng([seed, k]), iters,
                                    renormalize=balance)
        if val < best_val:
            best_pt, best_val = pt, val
    a, b = best_pt
    fac = make_factorization(a, np.linalg.solve(a, vs) @ np.linalg.inv(b), b, e).scaled(c)
    return NormEstimate(0.0, fac.value, fac, "factorization-search", restarts, RECON_RTOL, {"bestR": n})


# --------------------------------------------------------------------------
# combining factorizations


def _normalized(fac: Factorization, e):
    """Equivalent factors with ``ub(w) = 1``, ``||alpha||_{p'} = V^{1/p'}``, ``||beta||_p = V^{1/p}``."""
    V = fac.value
    if V == 0:
        return np.zeros_like(fac.alpha), np.zeros_like(fac.w), np.zeros_like(fac.beta)
    u = opnorm_upper(fac.w, e)
    na = entrywise_norm(fac.alpha, e.p_conj)
    nb = entrywise_norm(fac.beta, e.p)
    return fac.alpha * (V ** (1 / e.p_conj) / na), fac.w / u, fac.beta * (V ** (1 / e.p) / nb)


def direct_sum_combine(f1: Factorization, f2: Factorization) -> Factorization:
    """Block-diagonal factorization of ``v1 (+) v2`` with value at most ``f1.value + f2.value``.

    Each part is first normalized so that ``||w_i|| <= 1`` and its factor
    norms are ``V_i^{1/p'}`` and ``V_i^{1/p}``; the block factors then have
    norms ``(V_1 + V_2)^{1/p'}`` and ``(V_1 + V_2)^{1/p}``.
    """
    e = as_exponent(f1.p)
    a1, w1, b1 = _normalized(f1, e)
    a2, w2, b2 = _normalized(f2, e)
    return make_factorization(block_diag(a1, a2), block_diag(w1, w2), block_diag(b1, b2), e)


def sum_combine(f1: Factorization, f2: Factorization) -> Factorization:
    """Factorization of ``v1 + v2`` by ``[alpha1 alpha2] (w1 (+) w2) [beta1; beta2]``."""
    e = as_exponent(f1.p)
    a1, w1, b1 = _normalized(f1, e)
    a2, w2, b2 = _normalized(f2, e)
    return make_factorization(np.hstack([a1, a2]), block_diag(w1, w2), np.vstack([b1, b2]), e)


def check_norm_lower_inequality(v, e, restarts: int = 4, seed: int = DEFAULT_SEED, rtol: float = 1e-9,
                                upper: float | None = None, **budget) -> InequalityReport:
    """Check ``||v||_{p->p} <= n^{2 delta} ||v||_{1,n}`` with one-sided estimates.

    Compares the power-method lower bound of the operator norm against the
    factorization upper bound; pass ``upper`` to reuse a computed bound.
    """
    e = as_exponent(e)
    v = _square(v)
    n = v.shape[0]
    lhs = opnorm_lower(v, e, restarts=max(restarts, 1), seed=seed).lower
    if upper is None:
        upper = factnorm1_upper(v, e, restarts=restarts, seed=seed, **budget).upper
    rhs = n ** (2 * e.delta) * upper
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    rep = InequalityReport("norm1-lower", cases=1, max_ratio=ratio, details={"lhs": lhs, "rhs": rhs, "n": n, "p": e.p})
    if ratio > 1.0 + rtol:
        rep.violations.append({"lhs": lhs, "rhs": rhs, "matrix": v.tolist()})
    return rep

