"""Seeded sweeps over the implemented inequalities, plus exploratory searches.

Every asserted comparison puts a certified lower bound on the side that
must be smaller and a certified upper bound on the other; estimator slack
is recorded but never counted as a violation. Exploratory suites record
findings and never produce violations.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from ._search import random_descent
from .colspace import check_phi_psi_contractive, random_subspace
from .errors import InputError, StructuralError
from .factnorm import (
    check_norm_lower_inequality,
    factnorm1_lower,
    factnorm1_upper,
    factnorm2_upper,
    sum_combine,
    direct_sum_combine,
)
from .isometry import is_lp_isometry, is_polar_decomposable, polar_decompose
from .pnorms import (
    DEFAULT_SEED,
    as_exponent,
    as_matrix,
    check_opnorm_bounds,
    check_p_comparison,
    entrywise_norm,
    opnorm_lower,
    opnorm_upper,
)

__all__ = [
    "SUITES",
    "PROVED_SUITES",
    "Campaign",
    "CampaignReport",
    "run_campaign",
    "random_matrix",
    "random_isometry",
    "extension_gap",
    "ExtensionGapReport",
    "EXIT_OK",
    "EXIT_VIOLATION",
    "EXIT_INCONCLUSIVE",
]

SUITES = (
    "p-comparison",
    "opnorm-bounds",
    "norm1-axioms",
    "norm1-vs-norm2",
    "norm2-triangle-search",
    "polar-roundtrip",
    "phi-psi",
    "extension-gap",
)
PROVED_SUITES = {"p-comparison", "opnorm-bounds", "norm1-axioms", "norm1-vs-norm2", "polar-roundtrip", "phi-psi"}
ENSEMBLES = ("gaussian", "heavy", "sparse")

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_INCONCLUSIVE = 3


@dataclass
class Campaign:
    """A suite together with its exponent grid, sizes, trial count, seed and budgets.

    ``trials`` counts vectors per (p, n) cell for ``p-comparison``, matrices
    (or subspaces, or instances) per exponent for every other suite, with
    sizes cycling through ``1..n_max``.
    """

    suite: str
    p_list: list
    n_max: int
    trials: int
    seed: int = DEFAULT_SEED
    budgets: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise InputError(f"unknown suite {self.suite!r}; expected one of {', '.join(SUITES)}")
        if self.n_max < 1 or self.trials < 1:
            raise InputError("n_max and trials must be positive")
        self.p_list = [as_exponent(p) for p in self.p_list]
        if not self.p_list:
            raise InputError("p list is empty")


@dataclass
class CampaignReport:
    suite: str
    records: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    findings: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.violations:
            return EXIT_VIOLATION
        if self.findings:
            return EXIT_INCONCLUSIVE
        return EXIT_OK

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "exitCode": self.exit_code,
            "summary": self.summary,
            "records": self.records,
            "violations": self.violations,
            "findings": self.findings,
        }


def _hash(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(np.asarray(a, dtype=np.complex128))
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


def random_matrix(rows: int, cols: int, rng: np.random.Generator, ensemble: str = "gaussian") -> np.ndarray:
    """Random complex matrix from one of the ensembles.

    ``gaussian``: i.i.d. complex normal. ``heavy``: complex normal entries
    scaled by Student-t(2) magnitudes. ``sparse``: complex normal entries
    kept with probability 0.3 (at least one entry is kept).
    """
    Z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    if ensemble == "gaussian":
        return Z
    if ensemble == "heavy":
        return Z * np.abs(rng.standard_t(2.0, size=(rows, cols)))
    if ensemble == "sparse":
        mask = rng.random((rows, cols)) < 0.3
        mask.flat[rng.integers(rows * cols)] = True
        return Z * mask
    raise InputError(f"unknown ensemble {ensemble!r}")


def random_isometry(r: int, n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """r x n matrix with disjoint-support columns of unit p-norm (needs r >= n).

    Rows are dealt to columns by a random surjection; some rows may stay zero.
    """
    rows = rng.permutation(r)
    owner = np.full(r, -1)
    owner[rows[:n]] = np.arange(n)
    rest = rows[n:]
    owner[rest] = rng.integers(-1, n, size=rest.size)
    T = np.zeros((r, n), dtype=np.complex128)
    for i in range(r):
        if owner[i] >= 0:
            T[i, owner[i]] = rng.standard_normal() + 1j * rng.standard_normal()
    norms = np.sum(np.abs(T) ** p, axis=0) ** (1.0 / p)
    return T / norms


class _Cell:
    """Aggregates per-case values of one (p, n) grid cell."""

    def __init__(self, p: float, n, **extra):
        self.rec = {"p": p, "n": n, "cases": 0, "maxRatio": 0.0, "hash": hashlib.sha256(), **extra}

    def add(self, ratio: float, *arrays):
        self.rec["cases"] += 1
        self.rec["maxRatio"] = max(self.rec["maxRatio"], float(ratio))
        self.rec["hash"].update(_hash(*arrays).encode())

    def note_max(self, key: str, value: float):
        self.rec[key] = max(self.rec.get(key, 0.0), float(value))

    def done(self) -> dict:
        out = dict(self.rec)
        out["inputsHash"] = out.pop("hash").hexdigest()[:16]
        return out


def _bundle(suite: str, seed_path, p: float, **inputs) -> dict:
    return {"suite": suite, "seedPath": list(seed_path), "p": p, "inputs": inputs}


def _sizes(n_max: int, trials: int):
    return [1 + t % n_max for t in range(trials)]


# --------------------------------------------------------------------------
# suites


def _suite_p_comparison(c: Campaign, rep: CampaignReport):
    for pi, e in enumerate(c.p_list):
        for n in range(1, c.n_max + 1):
            seed_path = (c.seed, pi, n)
            r = check_p_comparison(n, e, c.trials, seed=np.random.SeedSequence(seed_path).generate_state(1)[0])
            rep.records.append({"p": e.p, "n": n, "cases": r.cases, "maxRatio": r.max_ratio})
            for v in r.violations:
                rep.violations.append(_bundle(c.suite, seed_path, e.p, **v))


def _suite_opnorm_bounds(c: Campaign, rep: CampaignReport):
    restarts = c.budgets.get("restarts", 4)
    for pi, e in enumerate(c.p_list):
        cells = {}
        for t, n in enumerate(_sizes(c.n_max, c.trials)):
            seed_path = (c.seed, pi, t)
            rng = np.random.default_rng(seed_path)
            r = int(rng.integers(1, c.n_max + 1))
            ens = ENSEMBLES[t % len(ENSEMBLES)]
            A = random_matrix(n, r, rng, ens)
            res = check_opnorm_bounds(A, e, restarts=restarts, seed=c.seed)
            cell = cells.setdefault(n, _Cell(e.p, n))
            cell.add(res.max_ratio, A)
            for v in res.violations:
                rep.violations.append(_bundle(c.suite, seed_path, e.p, ensemble=ens, **v))
        rep.records.extend(cells[n].done() for n in sorted(cells))


def _factnorm_budget(c: Campaign) -> dict:
    return {
        "restarts": c.budgets.get("restarts", 1),
        "outer": c.budgets.get("outer", 3),
        "polish_iters": c.budgets.get("polish_iters", 0),
    }


def _suite_norm1_axioms(c: Campaign, rep: CampaignReport):
    """Norm comparison, homogeneity, triangle and direct-sum combinations of factorizations."""
    budget = _factnorm_budget(c)
    tol = c.budgets.get("rtol", 1e-9)
    for pi, e in enumerate(c.p_list):
        cells = {}
        for t, n in enumerate(_sizes(min(c.n_max, 4), c.trials)):
            seed_path = (c.seed, pi, t)
            rng = np.random.default_rng(seed_path)
            ens = ENSEMBLES[t % len(ENSEMBLES)]
            v1 = random_matrix(n, n, rng, ens)
            v2 = random_matrix(n, n, rng, ens)
            scale = complex(rng.standard_normal(), rng.standard_normal())
            cell = cells.setdefault(n, _Cell(e.p, n))
            u1 = factnorm1_upper(v1, e, seed=c.seed, **budget)
            u2 = factnorm1_upper(v2, e, seed=c.seed, **budget)
            f1, f2 = u1.witness, u2.witness
            # norm comparison (a certified lower bound against n^{2 delta} times an upper bound)
            ineq = check_norm_lower_inequality(v1, e, restarts=budget["restarts"], seed=c.seed,
                                               rtol=tol, upper=u1.upper)
            ratios = [ineq.max_ratio]
            checks = []
            for v in ineq.violations:
                checks.append(("norm-comparison", v))
            # triangle inequality via the combined factorization of v1 + v2
            fs = sum_combine(f1, f2)
            recon = fs.reconstruction_error(v1 + v2)
            ratios.append(fs.value / (f1.value + f2.value) if f1.value + f2.value > 0 else 0.0)
            if fs.value > f1.value + f2.value + tol * max(1.0, f1.value + f2.value) or recon > 1e-8:
                checks.append(("triangle", {"combined": fs.value, "sum": f1.value + f2.value,
                                            "reconstruction": recon}))
            # direct sums
            fd = direct_sum_combine(f1, f2)
            if fd.value > f1.value + f2.value + tol * max(1.0, f1.value + f2.value):
                checks.append(("direct-sum", {"combined": fd.value, "sum": f1.value + f2.value}))
            # homogeneity: rescaling w turns the best factorization of v1 into one of scale * v1
            fc = f1.scaled(scale)
            hom = abs(fc.value - abs(scale) * f1.value) / max(abs(scale) * f1.value, np.finfo(float).tiny)
            cell.note_max("maxHomogeneityDeviation", hom)
            if hom > tol or fc.reconstruction_error(scale * v1) > 1e-8:
                checks.append(("homogeneity", {"scaled": fc.value, "expected": abs(scale) * f1.value}))
            cell.add(max(ratios), v1, v2)
            for kind, detail in checks:
                rep.violations.append(_bundle(c.suite, seed_path, e.p, check=kind, ensemble=ens,
                                              v1=v1, v2=v2, scale=scale, detail=detail))
        rep.records.extend(cells[n].done() for n in sorted(cells))


def _suite_norm1_vs_norm2(c: Campaign, rep: CampaignReport):
    """``||v||_{1,n} <= ||v||_{2,n}`` (asserted) and near-equality candidates (recorded)."""
    restarts = c.budgets.get("restarts", 2)
    iters = c.budgets.get("iters", 30)
    eq_tol = c.budgets.get("equality_tol", 1e-6)
    for pi, e in enumerate(c.p_list):
        cells = {}
        for t, n in enumerate(_sizes(min(c.n_max, 4), c.trials)):
            seed_path = (c.seed, pi, t)
            rng = np.random.default_rng(seed_path)
            ens = ENSEMBLES[t % len(ENSEMBLES)]
            v = random_matrix(n, n, rng, ens)
            lo = factnorm1_lower(v, e, restarts=restarts, seed=c.seed, ascent_iters=10).lower
            up = factnorm2_upper(v, e, restarts=restarts, seed=c.seed, iters=iters).upper
            ratio = lo / up if up > 0 else 0.0
            cell = cells.setdefault(n, _Cell(e.p, n))
            cell.add(ratio, v)
            if lo > up * (1.0 + 1e-9):
                rep.violations.append(_bundle(c.suite, seed_path, e.p, ensemble=ens, v=v, lower=lo, upper=up))
            elif e.p != 2.0 and n > 1 and up <= lo * (1.0 + eq_tol):
                rep.findings.append({"kind": "norm1-equals-norm2-candidate", "seedPath": list(seed_path),
                                     "p": e.p, "v": v, "lower1": lo, "upper2": up, "label": "inconclusive"})
        rep.records.extend(cells[n].done() for n in sorted(cells))


def _suite_norm2_triangle(c: Campaign, rep: CampaignReport):
    """Search for ``||v1 + v2||_{2,n} > ||v1||_{2,n} + ||v2||_{2,n}`` (exploratory).

    Only upper bounds of the polar-restricted norm are available, so an
    apparent excess is a candidate, labelled inconclusive.
    """
    restarts = c.budgets.get("restarts", 2)
    iters = c.budgets.get("iters", 30)
    for pi, e in enumerate(c.p_list):
        cells = {}
        for t, n in enumerate(_sizes(c.n_max, c.trials)):
            seed_path = (c.seed, pi, t)
            rng = np.random.default_rng(seed_path)
            ens = ENSEMBLES[t % len(ENSEMBLES)]
            v1 = random_matrix(n, n, rng, ens)
            v2 = random_matrix(n, n, rng, ens)
            u1, u2, u12 = (factnorm2_upper(x, e, restarts=restarts, seed=c.seed, iters=iters).upper
                           for x in (v1, v2, v1 + v2))
            ratio = u12 / (u1 + u2) if u1 + u2 > 0 else 0.0
            cell = cells.setdefault(n, _Cell(e.p, n))
            cell.add(ratio, v1, v2)
            if ratio > 1.0 + 1e-9:
                rep.findings.append({"kind": "norm2-triangle-excess", "seedPath": list(seed_path), "p": e.p,
                                     "v1": v1, "v2": v2, "upper1": u1, "upper2": u2, "upperSum": u12,
                                     "ratio": ratio, "label": "inconclusive"})
        rep.records.extend(cells[n].done() for n in sorted(cells))


def _suite_polar(c: Campaign, rep: CampaignReport):
    """Round trips on decomposable matrices and rejection of generic ones."""
    n_cap = min(c.n_max, 4)
    r_cap = max(2 * n_cap, 2)
    for pi, e in enumerate(c.p_list):
        cell = _Cell(e.p, f"<= {n_cap}", generic=0, maxReconstruction=0.0, maxNormError=0.0)
        for t in range(c.trials):
            seed_path = (c.seed, pi, t)
            rng = np.random.default_rng(seed_path)
            n = int(rng.integers(1, n_cap + 1))
            r = int(rng.integers(n, min(r_cap, 8) + 1))
            tau = random_isometry(r, n, e.p, rng)
            beta0 = random_matrix(n, n, rng)
            beta = tau @ beta0
            problems = {}
            try:
                dec = polar_decompose(beta, e)
                scale = np.abs(beta).max()
                recon = float(np.abs(dec.tau @ dec.beta0 - beta).max() / scale)
                nb = entrywise_norm(beta, e.p)
                nerr = abs(entrywise_norm(dec.beta0, e.p) - nb) / nb
                cell.note_max("maxReconstruction", recon)
                cell.note_max("maxNormError", nerr)
                if recon > 1e-10:
                    problems["reconstruction"] = recon
                if nerr > 1e-10:
                    problems["norm"] = nerr
                if not is_lp_isometry(dec.tau, e):
                    problems["isometry"] = True
            except StructuralError as exc:
                problems["structural"] = str(exc)
            # generic full-support matrix with more rows than columns; with one column
            # every matrix is decomposable, so generic samples use at least two
            ng = max(n, 2)
            rg = ng + 1 + int(rng.integers(0, 8 - ng))
            G = random_matrix(rg, ng, rng)
            generic_ok = e.p == 2.0 or not is_polar_decomposable(G, e)
            if not generic_ok:
                problems["generic-accepted"] = True
            cell.rec["generic"] += 1
            cell.add(0.0, beta, G)
            if problems:
                rep.violations.append(_bundle(c.suite, seed_path, e.p, beta=beta, generic=G, problems=problems))
        rep.records.append(cell.done())


def _suite_phi_psi(c: Campaign, rep: CampaignReport):
    inner = c.budgets.get("inner_trials", 5)
    m = c.budgets.get("m", 4)
    k = c.budgets.get("k", 2)
    for pi, e in enumerate(c.p_list):
        cell = _Cell(e.p, f"<= {c.n_max}", subspaces=0)
        for t in range(c.trials):
            seed_path = (c.seed, pi, t)
            E = random_subspace(m, k, e, np.random.default_rng(seed_path))
            r = check_phi_psi_contractive(E, c.n_max, inner, seed=c.seed)
            cell.rec["subspaces"] += 1
            cell.add(r.max_ratio, E.basis)
            cell.note_max("maxEstimatorGap", max(r.details["max_estimator_gap_phi"],
                                                 r.details["max_estimator_gap_psi"]))
            for v in r.violations:
                rep.violations.append(_bundle(c.suite, seed_path, e.p, basis=E.basis, detail=v))
        rep.records.append(cell.done())


def _suite_extension_gap(c: Campaign, rep: CampaignReport):
    """Extension gaps for the inclusion of the diagonal and for random maps on random subspaces."""
    tol = c.budgets.get("gap_tol", 1e-6)
    k = c.budgets.get("k", 2)
    diag = [np.diag(np.eye(k)[i]).astype(np.complex128) for i in range(k)]
    for pi, e in enumerate(c.p_list):
        for t in range(c.trials):
            seed_path = (c.seed, pi, t)
            rng = np.random.default_rng(seed_path)
            if t == 0:
                name, basis, images = "diagonal-inclusion", diag, diag
            else:
                dim = int(rng.integers(1, k * k))
                name = f"random-{dim}"
                basis = [random_matrix(k, k, rng) for _ in range(dim)]
                images = [random_matrix(k, k, rng) for _ in range(dim)]
            res = extension_gap(basis, images, e, c.n_max, seed=c.seed,
                                iters=c.budgets.get("iters", 40), tol=tol)
            rec = {"p": e.p, "instance": name, "seedPath": list(seed_path),
                   "inputsHash": _hash(*basis, *images), **res.summary()}
            rep.records.append(rec)
            if res.status == "inconclusive":
                rep.findings.append({**rec, "label": "inconclusive"})


_RUNNERS = {
    "p-comparison": _suite_p_comparison,
    "opnorm-bounds": _suite_opnorm_bounds,
    "norm1-axioms": _suite_norm1_axioms,
    "norm1-vs-norm2": _suite_norm1_vs_norm2,
    "norm2-triangle-search": _suite_norm2_triangle,
    "polar-roundtrip": _suite_polar,
    "phi-psi": _suite_phi_psi,
    "extension-gap": _suite_extension_gap,
}


def run_campaign(c: Campaign) -> CampaignReport:
    """Run one suite; the report is a pure function of ``c``.

    Proved-inequality suites report violations (exit code 2); exploratory
    suites only report findings (exit code 3 when any were recorded).
    """
    rep = CampaignReport(c.suite)
    _RUNNERS[c.suite](c, rep)
    cases = sum(r.get("cases", 1) for r in rep.records)
    rep.summary = {
        "suite": c.suite,
        "proved": c.suite in PROVED_SUITES,
        "pList": [e.p for e in c.p_list],
        "nMax": c.n_max,
        "trials": c.trials,
        "seed": c.seed,
        "budgets": dict(sorted(c.budgets.items())),
        "cases": cases,
        "violations": len(rep.violations),
        "findings": len(rep.findings),
        "maxRatio": max((r.get("maxRatio", 0.0) for r in rep.records), default=0.0),
    }
    return rep


# --------------------------------------------------------------------------
# extension gaps


@dataclass
class ExtensionGapReport:
    level: int
    origin_lower: float
    best_extension_upper: float
    levels: list
    extension: np.ndarray
    free_parameters: int
    status: str

    @property
    def gap(self) -> float:
        return self.best_extension_upper - self.origin_lower

    def summary(self) -> dict:
        return {
            "level": self.level,
            "originLower": self.origin_lower,
            "bestExtensionUpper": self.best_extension_upper,
            "gap": self.gap,
            "originLowerByLevel": self.levels,
            "freeParameters": self.free_parameters,
            "status": self.status,
        }


def _kraus_bound(Phi: np.ndarray, e) -> float:
    """Bound from ``y -> sum_s s_s A_s y B_s`` read off an SVD of the realigned map."""
    k, _, t, _ = Phi.shape
    # R[(i, a), (b, j)] = Phi[a, b][i, j]
    R = Phi.transpose(2, 0, 1, 3).reshape(t * k, k * t)
    U, s, Vh = np.linalg.svd(R)
    total = 0.0
    for idx in np.flatnonzero(s > 1e-14 * max(s[0], 1e-300)):
        A = U[:, idx].reshape(t, k)
        B = Vh[idx].reshape(k, t)
        total += s[idx] * opnorm_upper(A, e) * opnorm_upper(B, e)
    return total


def _cb_upper(Phi: np.ndarray, e) -> float:
    """Certified bound on the norm of every amplification of ``y -> sum_ab y_ab Phi[a, b]``."""
    k = Phi.shape[0]
    unit = sum(opnorm_upper(Phi[a, b], e) for a in range(k) for b in range(k))
    return min(unit, _kraus_bound(Phi, e))


def _amplify(X: np.ndarray, mats) -> np.ndarray:
    """``sum_b X[b] (x) mats[b]`` for coefficient matrices ``X[b]`` (L x L)."""
    return sum(np.kron(X[b], mats[b]) for b in range(len(mats)))


def extension_gap(v_basis, images, e, level: int = 2, seed: int = DEFAULT_SEED, iters: int = 40,
                  restarts: int = 3, tol: float = 1e-6) -> ExtensionGapReport:
    """Compare the level-``L`` norm of a map on ``V`` with the best extension to ``M_k``.

    ``v_basis`` are k x k matrices spanning ``V``; ``images`` their images
    (t x t). The lower side maximizes ``lower(||u_L(x)||) / upper(||x||)``
    over coefficient matrices for each level ``1..L``, each level seeded by
    the previous one's witness padded with zeros, so it never decreases.
    The upper side minimizes a certified bound on every amplification of an
    extension, over the images of an orthonormal complement of ``V``.

    ``status`` is ``closed`` when the gap is at most ``tol`` relative,
    ``unique-extension`` when ``V = M_k`` (the gap is then estimator slack
    only) and ``inconclusive`` otherwise.
    """
    e = as_exponent(e)
    basis = [as_matrix(b, "basis") for b in v_basis]
    imgs = [as_matrix(u, "image") for u in images]
    if len(basis) != len(imgs) or not basis:
        raise InputError("need one image per basis matrix")
    k = basis[0].shape[0]
    t = imgs[0].shape[0]
    if any(b.shape != (k, k) for b in basis) or any(u.shape != (t, t) for u in imgs):
        raise InputError("basis matrices must be k x k and images t x t")
    if level < 1:
        raise InputError("level must be >= 1")
    Vmat = np.array([b.ravel() for b in basis]).T  # k^2 x d
    d = Vmat.shape[1]
    if np.linalg.matrix_rank(Vmat, tol=1e-10 * max(np.abs(Vmat).max(), 1e-300)) < d:
        raise InputError("basis matrices are linearly dependent")
    comp = null_space(Vmat.conj().T)  # orthonormal complement, k^2 x c
    n_free = comp.shape[1]

    # ---- lower side, level by level
    levels = []
    best = 0.0
    prev = None
    for L in range(1, level + 1):
        rng = np.random.default_rng([seed, L])

        def neg_ratio(point):
            X = point[0]
            den = opnorm_upper(_amplify(X, basis), e)
            if den == 0:
                return 0.0
            return -opnorm_lower(_amplify(X, imgs), e, restarts=1, seed=seed).lower / den

        starts = []
        if prev is not None:
            pad = np.zeros((d, L, L), dtype=np.complex128)
            pad[:, :L - 1, :L - 1] = prev
            starts.append(pad)
        for b in range(d):
            X = np.zeros((d, L, L), dtype=np.complex128)
            X[b] = np.eye(L)
            starts.append(X)
        for _ in range(restarts):
            starts.append(rng.standard_normal((d, L, L)) + 1j * rng.standard_normal((d, L, L)))
        # the padded witness keeps the previous certified value valid at this level
        level_pt = starts[0]
        for j, X0 in enumerate(starts):
            (X,), val, _ = random_descent(neg_ratio, [X0], np.random.default_rng([seed, L, j]), iters)
            if -val > best:
                best, level_pt = -val, X
        prev = level_pt
        levels.append(float(best))

    # ---- upper side over extensions
    # images of matrix units under the extension determined by complement images Z
    Vpinv = np.linalg.pinv(Vmat)  # d x k^2
    img_flat = np.array([u.ravel() for u in imgs]).T  # t^2 x d

    def units(Z):
        # extension as a linear map on vec(y): M = img_flat Vpinv + Z comp^H
        M = img_flat @ Vpinv
        if n_free:
            M = M + Z @ comp.conj().T
        return M.T.reshape(k, k, t, t)

    def upper(point):
        return _cb_upper(units(point[0] if n_free else None), e)

    if n_free:
        starts = [np.zeros((t * t, n_free), dtype=np.complex128)]
        if t == k:
            starts.append(comp.copy())  # the complement mapped identically
        rng = np.random.default_rng([seed, 0])
        for _ in range(restarts):
            starts.append(0.5 * (rng.standard_normal((t * t, n_free)) + 1j * rng.standard_normal((t * t, n_free))))
        up, Zbest = math.inf, None
        for j, Z0 in enumerate(starts):
            (Z,), val, _ = random_descent(upper, [Z0], np.random.default_rng([seed, 100 + j]), iters * 5)
            if val < up:
                up, Zbest = val, Z
        Phi = units(Zbest)
    else:
        Phi = units(None)
        up = _cb_upper(Phi, e)
    if n_free == 0:
        status = "unique-extension"
    elif up - best <= tol * max(1.0, up):
        status = "closed"
    else:
        status = "inconclusive"
    return ExtensionGapReport(level, float(best), float(up), levels, Phi, n_free, status)
