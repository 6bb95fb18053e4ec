"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 inequality violation,
3 inconclusive findings only. ``isometry-check`` exits 1 when the matrix
is not an isometry. Every report is written atomically; without ``--out``
it goes to standard output.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from ._io import (
    atomic_write,
    dumps,
    load_column_matrix,
    load_map,
    load_matrix,
    matrix_to_json,
)
from .colspace import ColumnMatrix, SubspaceEmbedding, col_matrix_norm, counterexample_report
from .errors import InputError, StructuralError
from .factnorm import factnorm1, factnorm1_lower, factnorm2_upper
from .isometry import DEFAULT_TOL, is_lp_isometry, polar_decompose
from .pnorms import DEFAULT_SEED, Exponent, _as_power, entrywise_norm, opnorm
from .verify import SUITES, Campaign, extension_gap, run_campaign

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with code 1 and a one-line message."""

    def error(self, message):
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _exponent(text: str) -> Exponent:
    try:
        return Exponent.parse(text)
    except (InputError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _power(text: str) -> float:
    try:
        if "/" in text:
            return Exponent.parse(text).p
        return _as_power(float(text))
    except (InputError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _exponent_list(text: str) -> list:
    return [_exponent(part.strip()) for part in text.split(",") if part.strip()]


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _budget(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"budget must look like key=value, got {text!r}")
    try:
        number = int(value)
    except ValueError:
        try:
            number = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"budget value for {key!r} is not a number") from None
    if number <= 0:
        raise argparse.ArgumentTypeError(f"budget {key!r} must be positive")
    return key, number


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, (int, float, str, bool)) or obj is None:
        yield prefix[:-1], obj


def _csv(report: dict) -> str:
    lines = ["key,value"]
    for key, value in _flatten(report):
        text = dumps(value)
        lines.append(f"{key},{text}")
    return "\n".join(lines) + "\n"


def _emit(args, report: dict) -> None:
    text = _csv(report) if args.format == "csv" else dumps(report) + "\n"
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _sidecar(out: str, tag: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}.{tag}{ext or '.json'}"


# --------------------------------------------------------------------------
# subcommands


def cmd_opnorm(args) -> int:
    A = load_matrix(args.matrix)
    est = opnorm(A, args.p, restarts=args.restarts, tol=args.power_tol, seed=args.seed)
    _emit(args, {
        "p": args.p.p, "pConj": args.p.p_conj, "rows": A.shape[0], "cols": A.shape[1],
        "lower": est.lower, "upper": est.upper, "gap": est.gap, "witness": est.witness,
        "method": "power-iteration+interpolation", "seed": args.seed,
    })
    return EXIT_OK


def cmd_entrywise(args) -> int:
    A = load_matrix(args.matrix)
    _emit(args, {"q": args.q, "value": entrywise_norm(A, args.q)})
    return EXIT_OK


def cmd_isometry_check(args) -> int:
    T = load_matrix(args.matrix)
    cert = is_lp_isometry(T, args.p, args.tol if args.tol is not None else DEFAULT_TOL)
    _emit(args, {
        "p": args.p.p, "isIsometry": cert.is_isometry, "criterion": cert.criterion,
        "supports": cert.supports, "columnNorms": cert.norms,
        "overlaps": [{"columns": [j, k], "rows": rows} for j, k, rows in cert.overlaps],
        "gramError": cert.gram_error,
    })
    return EXIT_OK if cert.is_isometry else EXIT_INPUT


def cmd_polar(args) -> int:
    B = load_matrix(args.matrix)
    dec = polar_decompose(B, args.p, args.tol if args.tol is not None else DEFAULT_TOL)
    scale = max(np.abs(B).max(), np.finfo(float).tiny)
    _emit(args, {
        "p": args.p.p,
        "tau": matrix_to_json(dec.tau),
        "beta0": matrix_to_json(dec.beta0),
        "lambda": dec.lam,
        "groups": [[int(i) for i in part] for part in dec.parts],
        "reconstructionError": float(np.abs(dec.tau @ dec.beta0 - B).max() / scale),
    })
    return EXIT_OK


def cmd_factnorm(args) -> int:
    v = load_matrix(args.matrix)
    if v.shape[0] != v.shape[1]:
        raise InputError(f"matrix file {args.matrix!r}: factorization norms need a square matrix, got {v.shape}")
    n = v.shape[0]
    if args.which == 1:
        est = factnorm1(v, args.p, rmax=args.rmax, restarts=args.restarts, seed=args.seed)
        fac, dual, lower, upper = est.info["factorization"], est.witness, est.lower, est.upper
    else:
        up = factnorm2_upper(v, args.p, restarts=args.restarts, seed=args.seed)
        lo = factnorm1_lower(v, args.p, restarts=args.restarts, seed=args.seed)
        fac, dual, lower, upper = up.witness, lo.witness, lo.lower, up.upper
    fac_json = {"alpha": matrix_to_json(fac.alpha), "w": matrix_to_json(fac.w),
                "beta": matrix_to_json(fac.beta), "value": fac.value}
    dual_json = {"f": matrix_to_json(dual.f), "pairing": dual.pairing, "fOpUpper": dual.f_op_upper}
    report = {"which": args.which, "p": args.p.p, "n": n, "lower": lower, "upper": upper,
              "gap": upper - lower, "bestR": fac.r, "seed": args.seed}
    if args.out:
        paths = {"factorization": _sidecar(args.out, "factorization"), "dual": _sidecar(args.out, "dual")}
        atomic_write(paths["factorization"], dumps(fac_json) + "\n")
        atomic_write(paths["dual"], dumps(dual_json) + "\n")
        report["witnessFiles"] = {k: os.path.basename(p) for k, p in paths.items()}
    else:
        report["witness"] = {"factorization": fac_json, "dual": dual_json}
    _emit(args, report)
    return EXIT_OK


def cmd_colnorm(args) -> int:
    X = ColumnMatrix(load_column_matrix(args.matrix))
    if args.subspace:
        X.check_in(SubspaceEmbedding(load_matrix(args.subspace), args.p))
    est = col_matrix_norm(X, args.p, restarts=args.restarts, seed=args.seed)
    _emit(args, {"p": args.p.p, "n": X.n, "m": X.m, "lower": est.lower, "upper": est.upper,
                 "gap": est.gap, "witness": est.witness})
    return EXIT_OK


def cmd_counterexample(args) -> int:
    E = SubspaceEmbedding(load_matrix(args.subspace), args.p)
    rep = counterexample_report(E, n_max=args.nmax, trials=args.trials, restarts=args.restarts,
                                iterations=args.iterations, seed=args.seed,
                                margin=args.tol if args.tol is not None else 1e-6)
    rep["projection"]["P"] = matrix_to_json(rep["projection"]["P"])
    _emit(args, rep)
    return EXIT_OK if not rep["phiPsi"]["violations"] else EXIT_VIOLATION


def cmd_verify(args) -> int:
    budgets = dict(args.budget or [])
    if args.tol is not None:
        budgets["rtol"] = args.tol
    c = Campaign(args.suite, args.p, args.nmax, args.trials, args.seed, budgets)
    start = time.perf_counter()
    rep = run_campaign(c)
    elapsed = time.perf_counter() - start
    out = args.out or "."
    report = rep.as_dict()
    atomic_write(os.path.join(out, "report.json"), dumps(report) + "\n")
    header = sorted({k for r in rep.records for k in r})
    lines = [",".join(header)]
    for r in rep.records:
        lines.append(",".join(dumps(r.get(k, "")) if not isinstance(r.get(k), list) else '"list"'
                              for k in header))
    atomic_write(os.path.join(out, "summary.csv"), "\n".join(lines) + "\n")
    s = rep.summary
    print(f"{c.suite}: {s['cases']} cases, {s['violations']} violations, {s['findings']} findings, "
          f"max ratio {s['maxRatio']:.6g}")
    print(f"wall-clock {elapsed:.2f} s", file=sys.stderr)
    return rep.exit_code


def cmd_extension_gap(args) -> int:
    basis, images = load_map(args.maps)
    res = extension_gap(basis, images, args.p, level=args.level, seed=args.seed, iters=args.iters,
                        restarts=args.restarts, tol=args.tol if args.tol is not None else 1e-6)
    k = res.extension.shape[0]
    report = {"p": args.p.p, **res.summary(),
              "extension": [[matrix_to_json(res.extension[a, b]) for b in range(k)] for a in range(k)]}
    _emit(args, report)
    return EXIT_INCONCLUSIVE if res.status == "inconclusive" else EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (default 42)")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--out", default=None, help="output path (directory for verify)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="popspace", description="Matrix p-norms, factorization norms and column spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("opnorm", parents=[common], help="two-sided estimate of the p -> p operator norm")
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--restarts", type=_positive, default=8)
    p.add_argument("--power-tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_opnorm)

    p = sub.add_parser("entrywise", parents=[common], help="entrywise q-norm (q in [1, inf])")
    p.add_argument("--q", type=_power, required=True)
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_entrywise)

    p = sub.add_parser("isometry-check", parents=[common], help="decide whether a matrix is an l_p isometry")
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_isometry_check)

    p = sub.add_parser("polar", parents=[common], help="l_p polar decomposition beta = tau beta0")
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_polar)

    p = sub.add_parser("factnorm", parents=[common], help="factorization norm sandwich")
    p.add_argument("--which", type=int, choices=(1, 2), default=1)
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--rmax", type=_positive, default=None)
    p.add_argument("--restarts", type=_positive, default=2)
    p.set_defaults(func=cmd_factnorm)

    p = sub.add_parser("colnorm", parents=[common], help="column norm of an n x n matrix of vectors")
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--matrix", required=True, help='JSON {"n", "m", "re", "im"} with re of shape n x n x m')
    p.add_argument("--subspace", default=None, help="optional basis matrix; entries must lie in its span")
    p.add_argument("--restarts", type=_positive, default=8)
    p.set_defaults(func=cmd_colnorm)

    p = sub.add_parser("counterexample", parents=[common], help="phi/psi checks and projection constant")
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--subspace", required=True)
    p.add_argument("--nmax", type=_positive, default=3)
    p.add_argument("--trials", type=_positive, default=20)
    p.add_argument("--restarts", type=_positive, default=32)
    p.add_argument("--iterations", type=_positive, default=200)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("verify", parents=[common], help="run a seeded verification campaign")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--p", type=_exponent_list, required=True, help="comma-separated exponents")
    p.add_argument("--nmax", type=_positive, required=True)
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--budget", type=_budget, action="append", metavar="KEY=VALUE",
                   help="suite budget such as restarts=2 (repeatable)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("extension-gap", parents=[common], help="compare a map on V with its best extension")
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--maps", required=True, help='JSON {"basis": [matrix...], "images": [matrix...]}')
    p.add_argument("--level", type=_positive, default=2)
    p.add_argument("--iters", type=_positive, default=40)
    p.add_argument("--restarts", type=_positive, default=3)
    p.set_defaults(func=cmd_extension_gap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, StructuralError) as exc:
        print(f"popspace {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
