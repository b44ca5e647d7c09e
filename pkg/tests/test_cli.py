import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from qcapacity import __version__
from qcapacity.channels import identity, save_channel, save_state
from qcapacity.cli import main
from qcapacity.states import basis_state, maximally_mixed


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


@pytest.fixture
def state_files(tmp_path):
    paths = {"mixed": tmp_path / "mixed.json", "pure0": tmp_path / "pure0.json"}
    save_state(maximally_mixed(2), paths["mixed"])
    save_state(basis_state(2, 0), paths["pure0"])
    return paths


def test_entropy(capsys, state_files):
    code, report, err = run(capsys, "entropy", "--state", str(state_files["mixed"]))
    assert code == 0
    assert np.isclose(report["results"]["entropy"], 1.0)
    assert report["command"] == "entropy"
    assert report["config"] is None
    digest = hashlib.sha256(state_files["mixed"].read_bytes()).hexdigest()
    assert report["inputs"]["state"]["sha256"] == digest
    assert "S(rho)" in err


def test_entropy_relative(capsys, state_files):
    code, report, _ = run(capsys, "entropy", "--state", str(state_files["pure0"]), "--sigma", str(state_files["mixed"]))
    assert code == 0
    assert np.isclose(report["results"]["relative_entropy"], 1.0)
    assert report["results"]["support_violation"] is False


def test_entropy_infinite(capsys, state_files):
    code, report, err = run(capsys, "entropy", "--state", str(state_files["mixed"]), "--sigma", str(state_files["pure0"]))
    assert code == 0
    assert report["results"]["relative_entropy"] == "inf"
    assert report["results"]["support_violation"] is True
    assert "inf" in err


def test_entropy_bad_state(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dim": 2, "matrix": [[[0.7, 0], [0, 0]], [[0, 0], [0.4, 0]]]}))
    code, report, err = run(capsys, "entropy", "--state", str(path))
    assert code == 2 and report is None
    assert "TraceNotOne" in err
    code, _, err = run(capsys, "entropy", "--state", str(tmp_path / "missing.json"))
    assert code == 2


def test_capacity_zoo(capsys):
    code, report, err = run(capsys, "capacity", "--channel", "zoo:identity(2)", "--restarts", "2")
    assert code == 0
    assert abs(report["results"]["value"] - 1.0) <= 1e-6
    assert report["config"]["restarts"] == 2
    assert report["tool_version"] == __version__
    assert isinstance(report["runtime_ms"], int)
    assert "Q1" in err


def test_capacity_erasure(capsys):
    code, report, _ = run(capsys, "capacity", "--channel", "zoo:erasure(2,0.25)", "--restarts", "4")
    assert code == 0
    assert abs(report["results"]["value"] - 0.5) <= 1e-3


def test_capacity_copies(capsys):
    code, report, _ = run(capsys, "capacity", "--channel", "zoo:erasure(2,0.25)", "--copies", "2", "--restarts", "2")
    assert code == 0
    assert report["results"]["copies"] == 2
    assert abs(report["results"]["value"] - 0.5) <= 5e-3


def test_capacity_file(capsys, tmp_path):
    path = tmp_path / "id.json"
    save_channel(identity(2), path)
    code, report, _ = run(capsys, "capacity", "--channel", str(path), "--restarts", "2")
    assert code == 0
    assert report["inputs"]["channel"]["sha256"] == hashlib.sha256(path.read_bytes()).hexdigest()


def test_capacity_errors(capsys, tmp_path):
    assert run(capsys, "capacity", "--channel", "zoo:bogus(1)")[0] == 2
    assert run(capsys, "capacity", "--channel", "zoo:erasure(2,1.5)")[0] == 2
    assert run(capsys, "capacity", "--channel", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "capacity", "--channel", "zoo:identity(2)", "--copies", "3", "--max-dim", "4")[0] == 3
    assert run(capsys, "capacity", "--channel", "zoo:identity(2)", "--restarts", "0")[0] == 2


def test_holevo(capsys):
    code, report, err = run(capsys, "holevo", "--channel", "zoo:depolarizing(1)", "--restarts", "2")
    assert code == 0
    assert abs(report["results"]["value"]) <= 1e-8
    code, report, _ = run(capsys, "holevo", "--channel", "zoo:identity(2)", "--restarts", "2")
    assert abs(report["results"]["value"] - 1.0) <= 1e-8
    if report["results"]["converged"]:
        assert report["results"]["certificate_gap"] <= 1e-8


def test_superactivation(capsys):
    code, report, err = run(
        capsys, "superactivation", "--channel-a", "zoo:erasure(2,0.5)", "--channel-b", "zoo:erasure(2,0.5)", "--restarts", "2"
    )
    assert code == 0
    assert report["results"]["verdict"] != "SUPERACTIVE_CANDIDATE"
    assert report["results"]["additivity_gap"] <= 1e-3
    assert "verdict" in err


def test_superactivation_identity_pair(capsys):
    code, report, _ = run(
        capsys, "superactivation", "--channel-a", "zoo:identity(2)", "--channel-b", "zoo:identity(2)", "--restarts", "2"
    )
    assert report["results"]["verdict"] == "ADDITIVE_PRODUCT"


def test_verify(capsys):
    code, report, err = run(capsys, "verify", "--suite", "factorization", "--trials", "50")
    assert code == 0
    (check,) = report["results"]["checks"]
    assert check["passed"] and check["max_deviation"] <= 1e-8
    code, report, _ = run(capsys, "verify", "--suite", "identities", "--trials", "10")
    assert code == 0
    assert [c["name"] for c in report["results"]["checks"]] == ["factorization", "holevo_relent", "klein", "entropy_additivity"]


def test_verify_zero_trials(capsys):
    code, report, _ = run(capsys, "verify", "--suite", "identities", "--trials", "0")
    assert code == 0
    assert report["results"]["passed"] is True
    assert all(c["max_deviation"] == 0 for c in report["results"]["checks"])


def test_verify_failure_exit_code(capsys, monkeypatch):
    import qcapacity.verification as verification

    monkeypatch.setitem(verification.TOLERANCES, "klein", -1.0)
    code, report, err = run(capsys, "verify", "--suite", "identities", "--trials", "2")
    assert code == 1
    assert report["results"]["passed"] is False
    assert "FAIL" in err


def test_verify_negative_trials(capsys):
    assert run(capsys, "verify", "--suite", "factorization", "--trials", "-1")[0] == 2


def test_payload_is_reproducible(capsys):
    argv = ["capacity", "--channel", "zoo:amplitude_damping(0.2)", "--restarts", "3", "--seed", "7"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    a.pop("runtime_ms")
    b.pop("runtime_ms")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_console_script_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "qcapacity.cli", "verify", "--suite", "factorization", "--trials", "3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["command"] == "verify"
