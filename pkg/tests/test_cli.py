import json
import subprocess
import sys

import pytest

from symcurv.cli import run

FS_FLOAT = ["diagnose", "--model", "fubini_study", "--n", "2", "--points", "5", "--mode", "float", "--tol", "1e-9"]


def report(tmp_path, argv, name="r.json"):
    out = tmp_path / name
    code = run(argv + ["-o", str(out)])
    return code, json.loads(out.read_text()), out.read_bytes()


def test_fubini_study_diagnose(tmp_path):
    code, doc, _ = report(tmp_path, FS_FLOAT)
    assert code == 0
    assert len(doc["points"]) == 5
    for p in doc["points"]:
        assert p["report"]["is_ricci_type"] is True
        assert max(abs(x) for x in p["report"]["u"]) <= 1e-9
    assert doc["summary"]["pass"] is True


def test_random_model_fails(tmp_path):
    code, doc, _ = report(tmp_path, ["diagnose", "--model", "random", "--seed", "2", "--n", "2", "--points", "2"])
    assert code == 2
    assert all(p["report"]["is_ricci_type"] is False for p in doc["points"])
    assert doc["summary"]["pass"] is False


def test_coframe4(tmp_path):
    code, doc, raw = report(tmp_path, ["coframe4"])
    assert code == 0 and b'"2/3"' in raw
    code, _, _ = report(tmp_path, ["coframe4", "--mutate-dbeta", "1"], "m.json")
    assert code == 2


def test_exact_reports_are_byte_identical(tmp_path):
    argv = ["diagnose", "--model", "fubini_study", "--n", "2", "--points", "2", "--seed", "3"]
    _, _, a = report(tmp_path, argv, "a.json")
    _, _, b = report(tmp_path, argv, "b.json")
    assert a == b
    _, _, c = report(tmp_path, argv[:-1] + ["4"], "c.json")
    assert a != c


def test_environment_overrides_mode(tmp_path, monkeypatch):
    monkeypatch.setenv("SYMCURV_MODE", "float")
    _, doc, _ = report(tmp_path, ["axioms", "--model", "fubini_study", "--n", "1", "--points", "1", "--mode", "exact"])
    assert doc["mode"] == "float"


@pytest.mark.parametrize("argv", [
    ["axioms", "--model", "random", "--seed", "1", "--n", "2", "--points", "2"],
    ["triple", "--model", "fubini_study", "--n", "2", "--points", "1"],
    ["homogeneous", "--model", "filiform4"],
])
def test_other_subcommands_pass(tmp_path, argv):
    code, doc, _ = report(tmp_path, argv)
    assert code == 0, doc["summary"]
    assert set(doc) >= {"model", "mode", "points", "summary"}


@pytest.mark.parametrize("argv", [
    ["diagnose"],
    ["diagnose", "--model", "sphere"],
    ["diagnose", "--model", "fubini_study", "--n", "1"],
    ["diagnose", "--model", "fubini_study", "--n", "2", "--depth", "2"],
    ["diagnose", "--model", "fubini_study", "--points", "0"],
])
def test_usage_and_model_errors_exit_1(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err


def test_triple_gate_is_a_residual_failure(tmp_path):
    code, doc, _ = report(tmp_path, ["triple", "--model", "random", "--n", "2", "--points", "1"])
    assert code == 2
    assert "gate" in doc["points"][0]["report"]["error"]


def test_bad_model_file_names_invariant(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"kind": "algebraic", "n": 2, "c": [[0, 1, 1, 1], [1, 2, 2, 1]],
                                "omega": [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]}))
    assert run(["homogeneous", "--model-file", str(path)]) == 1
    assert "Jacobi" in capsys.readouterr().err
    assert run(["axioms", "--model-file", str(tmp_path / "missing.json")]) == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "symcurv", "coframe4"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["summary"]["pass"] is True
