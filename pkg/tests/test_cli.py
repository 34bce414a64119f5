import json
import subprocess
import sys
from pathlib import Path

import pytest

from mvdarboux.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def cfg(name):
    return str(CONFIGS / f"{name}.json")


def write_config(tmp_path, doc):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_compute_legendre(capsys):
    code, doc, _ = run(capsys, "compute", "--config", cfg("legendre_1d"))
    assert code == 0
    assert doc["format"] == "mvdarboux.family/1" and doc["ordering"] == "graded-lex-desc"
    assert [h[0][0] for h in doc["H"]] == ["2", "2/3", "8/45", "8/175", "128/11025", "128/43659"]
    assert doc["S"][2][0] == ["-1/3", "0", "1"]


def test_darboux_worked_example(capsys):
    code, doc, _ = run(capsys, "darboux", "--config", cfg("worked_nodes"), "--verify")
    assert code == 0
    t0 = doc["transforms"][0]
    assert t0["poisedness"]["certificate"] == "2"
    assert t0["deviation"] == "0"


@pytest.mark.parametrize("name", ["box2d_simple", "confluent", "complex_exact", "identity"])
def test_verify_exact_configs(capsys, name):
    code, doc, _ = run(capsys, "verify", "--config", cfg(name))
    assert code == 0 and doc["passed"]
    assert doc["identities"]["max_violation"] == "0"
    assert all(t["deviation"] == "0" for t in doc["transforms"])


@pytest.mark.parametrize("name", ["circle_float", "complex_nodes"])
def test_verify_float_configs(capsys, name):
    code, doc, _ = run(capsys, "verify", "--config", cfg(name))
    assert code == 0 and doc["scalar"] == "float"
    assert all(t["deviation"] <= 1e-9 for t in doc["transforms"])


def test_exit_factorization(capsys):
    code, _, err = run(capsys, "compute", "--config", cfg("discrete_singular"))
    assert code == 2 and "singular block at degree 1" in err


def test_exit_poisedness_plain_only(capsys):
    code, _, err = run(capsys, "darboux", "--config", cfg("confluent_plain"))
    assert code == 3 and "never poised" in err


def test_poised_check_reports_failure(capsys, tmp_path):
    doc = json.loads(Path(cfg("worked_nodes")).read_text())
    doc["darboux"]["nodes"] = [{"point": ["2", t], "factor": 0} for t in ("0", "1", "-1")]
    code, out, _ = run(capsys, "poised-check", "--config", write_config(tmp_path, doc))
    assert code == 3
    assert out["checks"][0]["poised"] is False and out["checks"][0]["certificate"] == "0"
    assert not out["checks"][0]["diagnostics"]["ok"]


def test_poised_check_worked(capsys):
    code, out, _ = run(capsys, "poised-check", "--config", cfg("worked_nodes"))
    assert code == 0
    chk = out["checks"][0]
    assert chk["poised"] and chk["certificate"] == "2" and chk["ideal"]["stacked_rank"] == 3


def test_exit_verification(capsys, monkeypatch):
    monkeypatch.setenv("MVDARBOUX_VERIFY_TOL", "1e-20")
    code, doc, err = run(capsys, "verify", "--config", cfg("circle_float"))
    assert code == 4 and not doc["passed"] and doc["failed"]


def test_exit_config_missing(capsys, tmp_path):
    code, _, err = run(capsys, "compute", "--config", str(tmp_path / "nope.json"))
    assert code == 5


@pytest.mark.parametrize("doc", [
    {"dimension": 2},
    {"dimension": 2, "degree": 3, "measure": {"type": "gaussian"}},
    {"dimension": 0, "degree": 3, "measure": {"type": "box", "bounds": []}},
    {"dimension": 2, "degree": 3, "measure": {"type": "box", "bounds": [["-1", "1"], ["-1", "1"]]},
     "darboux": {"factors": [{"poly": "2 - x"}], "nodes": [{"point": ["1", "1"], "factor": 0}]},
     "transform_degrees": [0]},
])
def test_exit_config_bad(capsys, tmp_path, doc):
    code, _, err = run(capsys, "darboux", "--config", write_config(tmp_path, doc))
    assert code == 5 and err


def test_invalid_json(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["compute", "--config", str(p)]) == 5


def test_sample_nodes_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "sample-nodes", "--config", cfg("box2d_simple"))
    assert code == 0 and set(out["nodes"]) == {"0", "1", "2"}
    doc = json.loads(Path(cfg("box2d_simple")).read_text())
    doc["darboux"]["nodes"] = out["nodes"]
    code, rep, _ = run(capsys, "verify", "--config", write_config(tmp_path, doc))
    assert code == 0 and all(t["node_source"]["source"] == "config" for t in rep["transforms"])


def test_seed_override_changes_nodes(capsys):
    _, a, _ = run(capsys, "sample-nodes", "--config", cfg("box2d_simple"), "--seed", "1")
    _, b, _ = run(capsys, "sample-nodes", "--config", cfg("box2d_simple"), "--seed", "2")
    _, c, _ = run(capsys, "sample-nodes", "--config", cfg("box2d_simple"), "--seed", "1")
    assert a == c and a != b


def test_scalar_override(capsys):
    code, doc, _ = run(capsys, "compute", "--config", cfg("legendre_1d"), "--scalar", "float")
    assert code == 0 and doc["scalar"] == "float"
    # family files keep floats as repr strings so they reload bit-for-bit
    assert abs(float(doc["H"][1][0][0]) - 2 / 3) < 1e-12


def test_out_file(capsys, tmp_path):
    target = tmp_path / "o.json"
    assert main(["compute", "--config", cfg("legendre_1d"), "--out", str(target)]) == 0
    assert json.loads(target.read_text())["degree"] == 5


def test_byte_identical_subprocess():
    cmd = [sys.executable, "-m", "mvdarboux", "darboux", "--config", cfg("box2d_simple"), "--verify"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.endswith(b"\n")
