import json
import subprocess
import sys

import numpy as np
import pytest

from lvsemme import build_w_star
from lvsemme.cli import main
from lvsemme.fixtures import confounded_mleaf, full_group, measured_fork, proportional_confounders
from lvsemme.io import read_data, read_matrix, read_model, write_matrix, write_model


@pytest.fixture
def model_file(tmp_path):
    p = tmp_path / "model.json"
    write_model(confounded_mleaf(), p)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "generate", "--seed", 4, "--p-y", 2, "--out", a)[0] == 0
    assert run(capsys, "generate", "--seed", 4, "--p-y", 2, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, "generate", "--seed", 4, "--p-y", 2)
    assert out == a.read_text()


def test_generate_impossible(capsys):
    code, _, err = run(capsys, "generate", "--p-y", 1, "--p-zc", 0, "--p-ml", 0, "--p-h", 1)
    assert code == 1 and "error:" in err


def test_mix_strip_recover(tmp_path, capsys, model_file):
    w, ws = tmp_path / "w.csv", tmp_path / "ws.csv"
    assert run(capsys, "mix", "--model", model_file, "--full", "--out", w)[0] == 0
    assert (tmp_path / "w.obs.csv").exists()
    assert run(capsys, "strip", "--w", w, "--out", ws)[0] == 0
    assert np.allclose(read_matrix(ws).as_float(), build_w_star(confounded_mleaf()).as_float(), atol=1e-12)
    out_json = tmp_path / "rec.json"
    code, out, err = run(capsys, "recover", "--wstar", ws, "--emit", "dog", "--out", out_json,
                         "--dot", tmp_path / "dots")
    assert code == 0
    assert "3 iterations" in out and "1 model(s) in the DOG class" in out
    assert err.startswith("# lvsemme recover: tol=1e-09 (default), seed=0")
    doc = json.loads(out_json.read_text())
    assert len(doc["models"]) == 1 and doc["models"][0]["edge_count"] == 3
    assert (tmp_path / "dots" / "model_0.dot").read_text().startswith("digraph model_0 {")


def test_recover_json_and_class(tmp_path, capsys):
    write_matrix(build_w_star(measured_fork()), tmp_path / "w.csv")
    code, out, _ = run(capsys, "recover", "--wstar", tmp_path / "w.csv", "--emit", "class", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["models"]) == 2 and doc["rejected"] == []


def test_tolerance_provenance(tmp_path, capsys, monkeypatch, model_file):
    monkeypatch.setenv("LVSEMME_TOL", "1e-6")
    _, _, err = run(capsys, "dot", "--model", model_file)
    assert "tol=1e-06 (env LVSEMME_TOL)" in err
    _, _, err = run(capsys, "dot", "--model", model_file, "--tol", "1e-3")
    assert "tol=0.001 (flag)" in err
    monkeypatch.setenv("LVSEMME_TOL", "oops")
    assert run(capsys, "dot", "--model", model_file)[0] == 1


def test_check_exit_codes(tmp_path, capsys, model_file):
    code, out, _ = run(capsys, "check", "--model", model_file)
    assert code == 0 and "LV-SEM-ME faithfulness: PASS" in out
    bad = tmp_path / "bad.json"
    write_model(proportional_confounders(), bad)
    code, out, _ = run(capsys, "check", "--model", bad, "--checks", "lvsemme", "--format", "json")
    assert code == 2
    assert json.loads(out)[0]["violations"][0]["bottleneck"] == 2


def test_compare(tmp_path, capsys):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    write_model(measured_fork(2, 3), a)
    write_model(measured_fork(4, 6), b)
    write_model(confounded_mleaf(), c)
    assert run(capsys, "compare", a, a)[0] == 0
    assert run(capsys, "compare", a, b)[0] == 2
    assert run(capsys, "compare", a, b, "--mode", "structure")[0] == 0
    assert run(capsys, "compare", a, c, "--mode", "structure")[0] == 2


def test_equivalents(tmp_path, capsys):
    m = tmp_path / "m.json"
    write_model(full_group(), m)
    code, out, _ = run(capsys, "equivalents", "--model", m, "--out-dir", tmp_path / "eq")
    assert code == 0 and "4 equivalent model(s)" in out
    files = sorted((tmp_path / "eq").glob("*.json"))
    assert len(files) == 4
    assert all(read_model(f).variables for f in files)


def test_sample(tmp_path, capsys, model_file):
    out = tmp_path / "d.csv"
    assert run(capsys, "sample", "--model", model_file, "--n", 5, "--seed", 2, "--noise", "laplace", "--out", out)[0] == 0
    t = read_data(out)
    assert t.columns == ("X2", "X1", "Y3") and t.values.shape == (5, 3)


def test_perturb(tmp_path, capsys):
    write_matrix(build_w_star(confounded_mleaf()), tmp_path / "w.csv")
    assert run(capsys, "perturb", "--wstar", tmp_path / "w.csv", "--sigma", 1e-6, "--out", tmp_path / "p.csv")[0] == 0
    code, out, _ = run(capsys, "recover", "--wstar", tmp_path / "p.csv", "--tol", 1e-4)
    assert code == 0 and "{X2}" in out


def test_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "dot", "--model", tmp_path / "nope.json")
    assert code == 1 and "error:" in err


def test_console_script(model_file):
    proc = subprocess.run([sys.executable, "-m", "lvsemme.cli", "dot", "--model", str(model_file)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and '"Z2" [shape=doublecircle]' in proc.stdout
