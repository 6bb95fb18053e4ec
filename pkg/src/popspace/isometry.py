"""l_p isometries and l_p polar decomposition.

For ``p != 2`` an ``r x n`` matrix is an isometry ``l_p^n -> l_p^r`` exactly
when its columns have pairwise disjoint supports and unit p-norm. A matrix
``beta`` factors as ``tau @ beta0`` with ``tau`` such an isometry iff its
nonzero rows fall into at most ``n`` projective classes (rows that are scalar
multiples of one another).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoIsometryError, StructuralError
from .pnorms import as_exponent, as_matrix, entrywise_norm, vec_p_norm

__all__ = [
    "DEFAULT_TOL",
    "RowGrouping",
    "IsometryCertificate",
    "Decomposability",
    "PolarDecomposition",
    "support",
    "is_lp_isometry",
    "group_rows",
    "is_polar_decomposable",
    "polar_decompose",
    "matrix_rank",
]

DEFAULT_TOL = 1e-9


def support(x, tol: float = 0.0) -> set[int]:
    """Indices (0-based) with ``|x_i| > tol * max_j |x_j|``; empty for ``x = 0``."""
    a = np.abs(np.asarray(x, dtype=np.complex128).ravel())
    m = a.max() if a.size else 0.0
    if m == 0:
        return set()
    return set(np.flatnonzero(a > tol * m).tolist())


def matrix_rank(A, tol: float = DEFAULT_TOL) -> int:
    s = np.linalg.svd(as_matrix(A), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass
class IsometryCertificate:
    is_isometry: bool
    p: float
    supports: list
    norms: list
    overlaps: list = field(default_factory=list)
    criterion: str = "disjoint-support"
    gram_error: float | None = None

    def __bool__(self):
        return self.is_isometry


def is_lp_isometry(tau, e, tol: float = DEFAULT_TOL) -> IsometryCertificate:
    """Decide whether ``tau`` (r x n) is an isometry ``l_p^n -> l_p^r``.

    For ``p != 2``: pairwise disjoint column supports and unit column
    p-norms. For ``p = 2`` the Gram identity ``tau^H tau = I`` is checked
    instead, since disjointness is then sufficient but not necessary.
    The returned certificate is truthy iff ``tau`` is an isometry.
    """
    e = as_exponent(e)
    T = as_matrix(tau, "tau")
    r, n = T.shape
    if r < n:
        raise NoIsometryError(f"no isometry exists in M_{{{r},{n}}} when r < n")
    norms = [vec_p_norm(T[:, j], e.p) for j in range(n)]
    supports = [sorted(support(T[:, j], tol)) for j in range(n)]
    if e.p == 2.0:
        gram = T.conj().T @ T
        err = float(np.max(np.abs(gram - np.eye(n))))
        return IsometryCertificate(err <= tol, e.p, supports, norms, criterion="gram", gram_error=err)
    overlaps = []
    for j in range(n):
        for k in range(j + 1, n):
            common = set(supports[j]) & set(supports[k])
            if common:
                overlaps.append((j, k, sorted(common)))
    unit = all(abs(v - 1.0) <= tol for v in norms)
    return IsometryCertificate(unit and not overlaps, e.p, supports, norms, overlaps)


@dataclass
class RowGrouping:
    """Projective classes of the rows of a matrix.

    ``pivots[k]`` is the row index heading class ``k``; row ``i`` equals
    ``coeffs[i] * row[pivots[classes[i]]]``. Zero rows have class ``-1``
    and coefficient 0.
    """

    pivots: list
    classes: np.ndarray
    coeffs: np.ndarray
    zero_rows: list
    residuals: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.pivots)

    def members(self, k: int) -> list:
        return np.flatnonzero(self.classes == k).tolist()

    def as_dict(self) -> dict:
        return {
            "pivots": list(self.pivots),
            "classes": self.classes.tolist(),
            "coeffs_re": self.coeffs.real.tolist(),
            "coeffs_im": self.coeffs.imag.tolist(),
            "zero_rows": list(self.zero_rows),
        }


def group_rows(beta, tol: float = DEFAULT_TOL) -> RowGrouping:
    """Greedy left-to-right grouping of rows into projective classes.

    Row ``u_i`` joins the existing pivot ``u_j`` minimizing
    ``min_c ||u_i - c u_j||_2 / ||u_i||_2`` when that residual is at most
    ``tol``; otherwise it starts a new class. Rows with 2-norm at most
    ``tol`` times the largest row norm are zero rows.
    """
    B = as_matrix(beta, "beta")
    r = B.shape[0]
    row_norms = np.linalg.norm(B, axis=1)
    biggest = row_norms.max()
    pivots: list[int] = []
    classes = np.full(r, -1, dtype=int)
    coeffs = np.zeros(r, dtype=np.complex128)
    residuals = np.zeros(r)
    zero_rows = []
    for i in range(r):
        u = B[i]
        if biggest == 0 or row_norms[i] <= tol * biggest:
            zero_rows.append(i)
            continue
        best_k, best_res, best_c = -1, np.inf, 0.0
        for k, j in enumerate(pivots):
            piv = B[j]
            c = np.vdot(piv, u) / np.vdot(piv, piv).real
            res = np.linalg.norm(u - c * piv) / row_norms[i]
            if res < best_res:
                best_k, best_res, best_c = k, res, c
        if best_k >= 0 and best_res <= tol:
            classes[i], coeffs[i], residuals[i] = best_k, best_c, best_res
        else:
            classes[i], coeffs[i] = len(pivots), 1.0
            pivots.append(i)
    return RowGrouping(pivots, classes, coeffs, zero_rows, residuals)


@dataclass
class Decomposability:
    decomposable: bool
    n_classes: int
    n: int
    pivots: list
    full_rank: bool
    rank: int
    reason: str = ""

    def __bool__(self):
        return self.decomposable

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def is_polar_decomposable(beta, e, tol: float = DEFAULT_TOL, grouping: RowGrouping | None = None) -> Decomposability:
    """Whether ``beta`` (r x n) admits ``beta = tau @ beta0`` with ``tau`` an l_p isometry.

    True iff the nonzero rows form at most ``n`` projective classes.
    ``full_rank`` additionally reports ``rank(beta) == n`` (membership in the
    full-rank decomposable set). At ``p = 2`` every ``r >= n`` matrix has a
    classical polar decomposition, so the answer is True there.
    """
    e = as_exponent(e)
    B = as_matrix(beta, "beta")
    r, n = B.shape
    rank = matrix_rank(B, tol)
    if r < n:
        return Decomposability(False, -1, n, [], False, rank, "r < n: no isometry in M_{r,n}")
    g = grouping if grouping is not None else group_rows(B, tol)
    if e.p == 2.0:
        return Decomposability(True, g.n_classes, n, g.pivots, rank == n, rank,
                               "p = 2: classical polar decomposition")
    ok = g.n_classes <= n
    reason = "" if ok else f"{g.n_classes} projective row classes exceed n = {n}"
    return Decomposability(ok, g.n_classes, n, g.pivots, ok and rank == n, rank, reason)


@dataclass
class PolarDecomposition:
    """``beta = tau @ beta0`` with ``tau`` an l_p isometry.

    ``parts[k]`` lists the rows carried by column ``k`` of ``tau``;
    ``lam[k]`` is the normalizing weight of that column.
    """

    tau: np.ndarray
    beta0: np.ndarray
    grouping: RowGrouping
    lam: np.ndarray
    parts: list
    p: float

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "lambda": self.lam.tolist(),
            "groups": [list(map(int, part)) for part in self.parts],
            "grouping": self.grouping.as_dict(),
        }


def _split_parts(g: RowGrouping, n: int, zero_rows: list) -> list:
    """Distribute rows over exactly ``n`` disjoint parts.

    Each class is one part to begin with. Missing parts are made by peeling
    rows off the largest class (the pivot is then repeated in ``beta0``),
    and, when every class is a singleton, from zero rows.
    """
    parts = [(k, g.members(k)) for k in range(g.n_classes)]
    spare_zero = list(zero_rows)
    while len(parts) < n:
        sizes = [len(rows) for _, rows in parts]
        big = int(np.argmax(sizes)) if parts else -1
        if parts and sizes[big] > 1:
            k, rows = parts[big]
            parts[big] = (k, rows[:-1])
            parts.append((k, rows[-1:]))
        elif spare_zero:
            parts.append((-1, [spare_zero.pop(0)]))
        else:  # cannot happen when r >= n
            raise StructuralError("not enough rows to build an isometry")
    return parts


def polar_decompose(beta, e, tol: float = DEFAULT_TOL) -> PolarDecomposition:
    """Construct an l_p polar decomposition ``beta = tau @ beta0``.

    For a part with rows ``i`` (``u_i = c_i u_j``, ``u_j`` the class pivot)
    the weight is ``lam = (sum |c_i|^p)^(-1/p)``; ``tau[i, k] = c_i lam`` and
    ``beta0[k] = u_j / lam``. This makes every column of ``tau`` a unit
    vector in l_p, and ``||beta0||_p = ||beta||_p`` entrywise.

    Raises :class:`StructuralError` when ``beta`` is not decomposable or when
    the result fails its own reconstruction/isometry checks.
    """
    e = as_exponent(e)
    B = as_matrix(beta, "beta")
    r, n = B.shape
    g = group_rows(B, tol)
    diag = is_polar_decomposable(B, e, tol, grouping=g)
    if r < n or g.n_classes > n:
        raise StructuralError(f"beta is not l_p-polar decomposable: {diag.reason}", diag.as_dict())
    parts = _split_parts(g, n, g.zero_rows)
    tau = np.zeros((r, n), dtype=np.complex128)
    beta0 = np.zeros((n, n), dtype=np.complex128)
    lam = np.ones(n)
    for col, (k, rows) in enumerate(parts):
        if k < 0:  # a zero row standing in for an empty column
            tau[rows[0], col] = 1.0
            continue
        c = g.coeffs[rows]
        lam[col] = vec_p_norm(c, e.p) ** -1.0
        tau[rows, col] = c * lam[col]
        beta0[col] = B[g.pivots[k]] / lam[col]
    dec = PolarDecomposition(tau, beta0, g, lam, [rows for _, rows in parts], e.p)
    _verify(dec, B, e, tol)
    return dec


def _verify(dec: PolarDecomposition, B: np.ndarray, e, tol: float):
    check_tol = max(1e-10, 2 * tol)
    scale = max(np.abs(B).max(), np.finfo(float).tiny)
    recon = float(np.abs(dec.tau @ dec.beta0 - B).max() / scale)
    nb = entrywise_norm(B, e.p)
    norm_err = abs(entrywise_norm(dec.beta0, e.p) - nb) / max(nb, np.finfo(float).tiny)
    iso = is_lp_isometry(dec.tau, e, max(tol, 1e-12))
    problems = {}
    if recon > check_tol:
        problems["reconstruction"] = recon
    if norm_err > check_tol:
        problems["norm"] = norm_err
    if not iso:
        problems["isometry"] = iso.overlaps or iso.norms
    if problems:
        raise StructuralError("polar decomposition failed verification", problems)
