"""JSON matrix files and deterministic report serialization."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, is_dataclass

import numpy as np

from .errors import InputError


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def _to_plain(obj):
    """Convert numpy and complex values to JSON-ready structures."""
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2:
                return matrix_to_json(obj)
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if is_dataclass(obj) and not isinstance(obj, type):
        return asdict(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Serialize ``obj`` as JSON with every float written to 17 significant digits.

    Key order is preserved, so equal inputs give byte-identical output.
    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    obj = _to_plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [dumps(v, indent, _level + 1) for v in obj]
        if all("\n" not in s for s in parts) and sum(len(s) for s in parts) < 100:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + s for s in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=np.complex128)
    return {"rows": A.shape[0], "cols": A.shape[1], "re": A.real.tolist(), "im": A.imag.tolist()}


def _read_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{what} file {path!r} does not exist") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {path!r} is not valid JSON ({exc.msg} at line {exc.lineno})") from None


def _numeric(data, field: str, shape: tuple, where: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{where}: field {field!r} must be a nested list of numbers") from None
    if arr.shape != shape:
        raise InputError(f"{where}: field {field!r} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{where}: field {field!r} contains non-finite values")
    return arr


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    """Parse ``{"rows", "cols", "re", "im"?}`` into a complex array."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object with rows, cols, re")
    for key in ("rows", "cols", "re"):
        if key not in obj:
            raise InputError(f"{where}: missing field {key!r}")
    rows, cols = obj["rows"], obj["cols"]
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 1 or cols < 1:
        raise InputError(f"{where}: fields 'rows' and 'cols' must be positive integers")
    re = _numeric(obj["re"], "re", (rows, cols), where)
    im = _numeric(obj["im"], "im", (rows, cols), where) if obj.get("im") is not None else np.zeros_like(re)
    return re + 1j * im


def load_matrix(path: str) -> np.ndarray:
    return matrix_from_json(_read_json(path, "matrix"), f"matrix file {path!r}")


def load_column_matrix(path: str) -> np.ndarray:
    """Parse ``{"n", "m", "re", "im"?}`` with ``re`` of shape (n, n, m)."""
    obj = _read_json(path, "column matrix")
    where = f"column matrix file {path!r}"
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object with n, m, re")
    for key in ("n", "m", "re"):
        if key not in obj:
            raise InputError(f"{where}: missing field {key!r}")
    n, m = obj["n"], obj["m"]
    if not isinstance(n, int) or not isinstance(m, int) or n < 1 or m < 1:
        raise InputError(f"{where}: fields 'n' and 'm' must be positive integers")
    re = _numeric(obj["re"], "re", (n, n, m), where)
    im = _numeric(obj["im"], "im", (n, n, m), where) if obj.get("im") is not None else np.zeros_like(re)
    return re + 1j * im


def load_map(path: str):
    """Parse ``{"basis": [matrix, ...], "images": [matrix, ...]}``."""
    obj = _read_json(path, "map")
    where = f"map file {path!r}"
    if not isinstance(obj, dict) or "basis" not in obj or "images" not in obj:
        raise InputError(f"{where}: expected fields 'basis' and 'images'")
    if not isinstance(obj["basis"], list) or not isinstance(obj["images"], list):
        raise InputError(f"{where}: 'basis' and 'images' must be lists of matrices")
    basis = [matrix_from_json(b, f"{where} basis[{i}]") for i, b in enumerate(obj["basis"])]
    images = [matrix_from_json(u, f"{where} images[{i}]") for i, u in enumerate(obj["images"])]
    return basis, images
