import json
import os
import subprocess
import sys

import numpy as np
import pytest

from popspace._io import atomic_write, dumps, load_matrix, matrix_to_json
from popspace.cli import main


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def mats(tmp_path):
    return {
        "id2": _write(tmp_path / "id2.json", matrix_to_json(np.eye(2))),
        "polar": _write(tmp_path / "polar.json", matrix_to_json(np.array([[1, 0], [2, 0], [0, 3]]))),
        "generic": _write(tmp_path / "generic.json", matrix_to_json(np.array([[1, 0], [0, 1], [1, 1]]))),
        "iso": _write(tmp_path / "iso.json", matrix_to_json(np.array([[1, 0], [0, 1], [0, 0]]))),
        "coord": _write(tmp_path / "coord.json", matrix_to_json(np.array([[1, 0], [0, 1], [0, 0]]))),
        "cplx": _write(tmp_path / "c.json", {"rows": 2, "cols": 2, "re": [[1, 2], [0, 1]], "im": [[0, 1], [1, 0]]}),
    }


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_opnorm_identity(capsys, mats):
    code, out, _ = run(capsys, "opnorm", "--p", "3", "--matrix", mats["id2"])
    data = json.loads(out)
    assert code == 0 and data["lower"] == 1.0 and data["upper"] == 1.0 and data["pConj"] == 1.5


def test_exponent_fraction_and_inf(capsys, mats):
    code, out, _ = run(capsys, "opnorm", "--p", "3/2", "--matrix", mats["cplx"])
    assert code == 0 and json.loads(out)["p"] == 1.5
    code, out, _ = run(capsys, "entrywise", "--q", "inf", "--matrix", mats["polar"])
    assert code == 0 and json.loads(out)["value"] == 3.0


def test_isometry_check_exit_codes(capsys, mats):
    assert run(capsys, "isometry-check", "--p", "3", "--matrix", mats["iso"])[0] == 0
    code, out, _ = run(capsys, "isometry-check", "--p", "3", "--matrix", mats["polar"])
    assert code == 1 and json.loads(out)["isIsometry"] is False


def test_polar_cli(capsys, mats):
    code, out, _ = run(capsys, "polar", "--p", "3", "--matrix", mats["polar"])
    data = json.loads(out)
    assert code == 0 and data["groups"] == [[0, 1], [2]]
    assert data["lambda"][0] == pytest.approx(9 ** (-1 / 3), rel=1e-15)
    code, _, err = run(capsys, "polar", "--p", "3", "--matrix", mats["generic"])
    assert code == 1 and "not l_p-polar decomposable" in err


def test_factnorm_sidecars(capsys, mats, tmp_path):
    out = tmp_path / "res" / "fn.json"
    code, _, _ = run(capsys, "factnorm", "--p", "3", "--matrix", mats["id2"], "--restarts", "1",
                     "--out", str(out))
    data = json.loads(out.read_text())
    assert code == 0 and data["lower"] == pytest.approx(2.0, rel=1e-9) and data["upper"] == pytest.approx(2.0)
    assert (tmp_path / "res" / "fn.factorization.json").exists()
    dual = json.loads((tmp_path / "res" / "fn.dual.json").read_text())
    assert dual["f"]["rows"] == 2


def test_factnorm_rejects_non_square(capsys, tmp_path):
    path = _write(tmp_path / "r.json", matrix_to_json(np.ones((2, 3))))
    code, _, err = run(capsys, "factnorm", "--p", "3", "--matrix", path)
    assert code == 1 and "square" in err


def test_colnorm_cli(capsys, tmp_path, mats):
    xi = [3.0, 4.0, 0.0]
    path = _write(tmp_path / "x.json", {"n": 1, "m": 3, "re": [[xi]]})
    code, out, _ = run(capsys, "colnorm", "--p", "2", "--matrix", path, "--subspace", mats["coord"])
    assert code == 0 and json.loads(out)["lower"] == pytest.approx(5.0, rel=1e-14)
    bad = _write(tmp_path / "y.json", {"n": 1, "m": 3, "re": [[[0, 0, 1.0]]]})
    assert run(capsys, "colnorm", "--p", "2", "--matrix", bad, "--subspace", mats["coord"])[0] == 1


def test_counterexample_cli(capsys, mats):
    code, out, _ = run(capsys, "counterexample", "--p", "3", "--subspace", mats["coord"], "--nmax", "1",
                       "--trials", "2", "--restarts", "2", "--iterations", "30")
    data = json.loads(out)
    assert code == 0 and "1-complemented, no obstruction" in data["flags"]


@pytest.mark.parametrize("content,needle", [
    ("{not json", "not valid JSON"),
    ('{"rows": 2, "cols": 2}', "missing field 're'"),
    ('{"rows": 2, "cols": 2, "re": [[1, 2]]}', "shape"),
    ('{"rows": 1, "cols": 1, "re": [["x"]]}', "nested list of numbers"),
    ('{"rows": 0, "cols": 1, "re": []}', "positive integers"),
])
def test_malformed_matrix_files(capsys, tmp_path, content, needle):
    path = tmp_path / "bad.json"
    path.write_text(content)
    code, _, err = run(capsys, "opnorm", "--p", "3", "--matrix", str(path))
    assert code == 1 and needle in err


def test_missing_file_and_bad_exponent(capsys, tmp_path, mats):
    code, _, err = run(capsys, "opnorm", "--p", "3", "--matrix", str(tmp_path / "none.json"))
    assert code == 1 and "does not exist" in err
    with pytest.raises(SystemExit) as exc:
        main(["opnorm", "--p", "0.5", "--matrix", mats["id2"]])
    assert exc.value.code == 1


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope", "--p", "3", "--nmax", "1", "--trials", "1"])
    assert exc.value.code == 1


def test_verify_writes_reports_deterministically(capsys, tmp_path):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        code, stdout, err = run(capsys, "verify", "--suite", "opnorm-bounds", "--p", "1.5,3", "--nmax", "3",
                                "--trials", "6", "--out", str(d))
        assert code == 0 and "0 violations" in stdout and "wall-clock" in err
        outs.append(((d / "report.json").read_bytes(), (d / "summary.csv").read_bytes()))
    assert outs[0] == outs[1]
    data = json.loads(outs[0][0])
    assert data["summary"]["seed"] == 42 and data["summary"]["cases"] == 12


def test_verify_budget_parsing(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "--suite", "phi-psi", "--p", "3", "--nmax", "1", "--trials", "1",
                     "--budget", "inner_trials=1", "--out", str(tmp_path))
    data = json.loads((tmp_path / "report.json").read_text())
    assert code == 0 and data["summary"]["budgets"] == {"inner_trials": 1}


def test_extension_gap_cli(capsys, tmp_path):
    d = [matrix_to_json(np.diag([1.0, 0.0])), matrix_to_json(np.diag([0.0, 1.0]))]
    path = _write(tmp_path / "map.json", {"basis": d, "images": d})
    code, out, _ = run(capsys, "extension-gap", "--p", "3", "--maps", path, "--level", "1", "--iters", "5",
                       "--restarts", "1")
    assert code == 0 and json.loads(out)["status"] == "closed"


def test_csv_format(capsys, mats):
    code, out, _ = run(capsys, "entrywise", "--q", "2", "--matrix", mats["id2"], "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "key,value" and out.splitlines()[2].startswith("value,1.414")


def test_module_entry_point(mats):
    cmd = [sys.executable, "-m", "popspace", "opnorm", "--p", "4", "--matrix", mats["id2"]]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["upper"] == 1.0


# ---- io helpers


def test_dumps_float_format():
    text = dumps({"x": 0.1, "y": float("inf"), "z": [1, 2.5], "c": 1 + 2j})
    data = json.loads(text)
    assert data["x"] == 0.1 and data["y"] == "inf" and data["c"] == {"re": 1.0, "im": 2.0}
    assert "0.10000000000000001" in text


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "o.json"
    atomic_write(str(target), "one")
    atomic_write(str(target), "two")
    assert target.read_text() == "two"
    assert os.listdir(tmp_path) == ["o.json"]


def test_matrix_roundtrip(tmp_path):
    A = np.array([[1 + 2j, -0.5], [1e-300, 3j]])
    path = tmp_path / "m.json"
    atomic_write(str(path), dumps(matrix_to_json(A)))
    assert np.array_equal(load_matrix(str(path)), A)
