import json
import math
import subprocess
import sys

import numpy as np
import pytest

import oracles
from mes_locc.cli import main
from mes_locc.serialization import load_state, save_state
from mes_locc.states import haar_random_state


def test_bell_writes_state(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["bell", "--d", "3", "--m", "1", "--n", "2", "--out", str(out)]) == 0
    state = load_state(out)
    assert np.allclose(state.amplitudes, oracles.bell(3, 1, 2), atol=1e-15)
    assert "|phi_{1,2}>" in capsys.readouterr().out


def test_bell_out_of_range_index(capsys):
    assert main(["bell", "--d", "3", "--m", "3", "--n", "0"]) == 2


@pytest.mark.parametrize("argv", [
    ["bell", "--d", "7", "--m", "0", "--n", "0"],
    ["bell", "--d", "1", "--m", "0", "--n", "0"],
    ["verify", "--bogus"],
    ["nosuch"],
    ["discriminate", "--d", "2"],
    ["verify", "--suite", "nope"],
    ["verify", "--tol", "exact=abc"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_basis_gates_exit_code(tmp_path):
    report = tmp_path / "r.json"
    assert main(["basis", "--d", "4", "--report", str(report)]) == 0
    rep = json.loads(report.read_text())
    assert rep["pass"] and {c["name"] for c in rep["checks"]} == {"basis.gram", "basis.completeness"}


def test_teleport_informational(tmp_path, capsys):
    chi = tmp_path / "chi.json"
    save_state(haar_random_state([3], 5, labels=["in"]), chi)
    assert main(["teleport", "--d", "3", "--input", str(chi), "--shots", "4"]) == 0
    out = capsys.readouterr().out
    assert "9 branches" in out and "sampled outcomes" in out
    assert main(["teleport", "--d", "2", "--resource", "schmidt:1"]) == 0


def test_teleport_bad_input_file(tmp_path):
    chi = tmp_path / "chi.json"
    chi.write_text("{}")
    assert main(["teleport", "--d", "2", "--input", str(chi)]) == 2
    save_state(haar_random_state([3], 5), chi)
    assert main(["teleport", "--d", "2", "--input", str(chi)]) == 2


def test_discriminate_weak_is_informational(tmp_path, capsys):
    report = tmp_path / "r.json"
    rc = main(["discriminate", "--d", "2", "--all", "--resource", "schmidt:0.894427,0.447214",
               "--report", str(report)])
    assert rc == 0
    rep = json.loads(report.read_text())
    probs = [c["measured"] for c in rep["checks"]]
    assert len(probs) == 4 and all(p < 1 for p in probs)
    assert all(c["pass"] is None for c in rep["checks"])


def test_discriminate_single_hidden(capsys):
    assert main(["discriminate", "--d", "3", "--hidden", "2,1"]) == 0
    assert "hidden (2,1): success 1" in capsys.readouterr().out


def test_discriminate_resource_dimension_mismatch():
    assert main(["discriminate", "--d", "3", "--all", "--resource", "schmidt:0.894427,0.447214"]) == 2


def test_rho_checks(tmp_path):
    report = tmp_path / "r.json"
    assert main(["rho", "--d", "2", "--check", "all", "--report", str(report)]) == 0
    names = {c["name"] for c in json.loads(report.read_text())["checks"]}
    assert names == {"rho.factorization", "rho_s.ppt", "rho.lognegativity_chain", "rho_s.smolin_decomposition"}
    for check in ("ppt", "reorder", "lognegativity"):
        assert main(["rho", "--d", "3", "--check", check]) == 0
    assert main(["rho", "--d", "3", "--check", "smolin"]) == 2
    assert main(["rho", "--d", "4"]) == 2


def test_rho_writes_density(tmp_path):
    out = tmp_path / "rho.json"
    assert main(["rho", "--d", "2", "--check", "reorder", "--out", str(out)]) == 0
    assert load_state(out).dim == 64


def test_distill(capsys):
    assert main(["distill", "--d", "3", "--all"]) == 0
    assert main(["distill", "--d", "2", "--component", "0,0", "--resource", "schmidt:1"]) == 0
    assert main(["distill", "--d", "4", "--all"]) == 2


def test_verify_empty_suite(tmp_path):
    report = tmp_path / "r.json"
    assert main(["verify", "--suite", "none", "--report", str(report)]) == 0
    rep = json.loads(report.read_text())
    assert rep["checks"] == [] and rep["pass"]


def test_verify_failure_exits_1(tmp_path):
    # a negative tolerance cannot be met, so every gated check fails
    report = tmp_path / "r.json"
    assert main(["verify", "--suite", "basis", "--max-d", "2", "--tol", "exact=-1", "--report", str(report)]) == 1
    rep = json.loads(report.read_text())
    assert not rep["pass"] and rep["summary"]["failed"] > 0
    assert main(["verify", "--suite", "discriminate", "--max-d", "2", "--tol", "exact=-1"]) == 1


def test_verify_report_sorted_and_complete(tmp_path):
    report = tmp_path / "r.json"
    assert main(["verify", "--suite", "all", "--max-d", "3", "--report", str(report)]) == 0
    rep = json.loads(report.read_text())
    keys = [(c["name"], c["d"], json.dumps(c["params"], sort_keys=True)) for c in rep["checks"]]
    assert keys == sorted(keys)
    for c in rep["checks"]:
        assert set(c) == {"name", "d", "params", "measured", "tolerance", "pass"}
    assert max(c["d"] for c in rep["checks"]) == 3


def test_seed_from_environment(tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("MES_LOCC_SEED", "7")
    assert main(["verify", "--suite", "teleport", "--max-d", "2", "--report", str(a)]) == 0
    monkeypatch.delenv("MES_LOCC_SEED")
    assert main(["verify", "--suite", "teleport", "--max-d", "2", "--seed", "7", "--report", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["config"]["seed"] == 7
    monkeypatch.setenv("MES_LOCC_SEED", "x")
    assert main(["verify", "--suite", "none"]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "mes_locc", "bell", "--d", "2", "--m", "0", "--n", "1"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert f"{1 / math.sqrt(2):.17g}"[:10] in out.stdout
