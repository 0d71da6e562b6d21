import json
import shutil
import subprocess

import numpy as np
import pytest

from srqtm import qstd
from srqtm.cli import main, parse_input
from srqtm.compiler import circuit_unitary, parse_circuit
from srqtm.oracle import compare

from conftest import HADAMARD_SQTM, UNEVEN_SQTM


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {"h.sqtm": HADAMARD_SQTM, "uneven.sqtm": UNEVEN_SQTM,
                       "empty.sqtm": "machine: e\nalphabet: #,0,1\nstates: q0,qf\nstart: q0\nfinal: qf\n",
                       "bad.sqtm": "machine: e\nalphabet: #,0,1\n",
                       "c.qcirc": "qubits 2\nh 1\ncnot 1 2\nry* 0.3 2\n"}.items():
        (tmp_path / name).write_text(text)
        paths[name.split(".")[0]] = str(tmp_path / name)
    paths["dir"] = tmp_path
    return paths


def test_check(files, capsys):
    assert main(["check", files["h"]]) == 0
    assert "locally_unitary: True" in capsys.readouterr().out
    assert main(["check", files["h"], "--format", "tree"]) == 0
    assert json.loads(capsys.readouterr().out)["rotational"] is True


def test_check_failure_exit(files, capsys, tmp_path):
    flipped = HADAMARD_SQTM.replace("-1/sqrt(2)", "1/sqrt(2)")
    (tmp_path / "f.sqtm").write_text(flipped)
    assert main(["check", str(tmp_path / "f.sqtm")]) == 1


def test_simulate(files, capsys):
    assert main(["simulate", files["h"], "--input", "#00", "--trace", "full"]) == 0
    out = capsys.readouterr().out
    assert "head_trace: 0 1 2 1 0" in out and "step 3:" in out
    assert main(["simulate", files["h"], "--input", "0.6:#00,0.8:#01", "--format", "tree"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["steps"] == 4 and len(doc["final"]) == 2


def test_simulate_seeded(files, capsys):
    args = ["simulate", files["h"], "--input", "#00", "--seed", "4", "--per-step-measure"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_exit_codes(files, capsys):
    assert main(["simulate", files["empty"], "--input", "#0"]) == 1
    assert "no rule for state q0" in capsys.readouterr().err
    assert main(["simulate", files["uneven"], "--input", "0.6:#00,0.8:#10"]) == 3
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "NonSynchronizedHalt" in err
    assert main(["check", files["bad"]]) == 1
    assert main(["check", str(files["dir"] / "missing.sqtm")]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["simulate", files["h"]]) == 2
    assert main(["simulate", files["h"], "--input", "#00", "--max-steps", "2"]) == 3


def test_build_render(capsys):
    assert main(["build", "h 2"]) == 0
    m = qstd.parse_machine(capsys.readouterr().out)
    assert len(m.states) == 5
    assert main(["build", "cnot 1 2", "toffoli 1 2 3", "identity"]) == 0
    assert qstd.parse_machine(capsys.readouterr().out).final == "g2.qf"
    assert main(["build", "bogus 1"]) == 1


def test_render(files, capsys):
    assert main(["render", files["h"]]) == 0
    out = capsys.readouterr().out
    assert out.startswith('digraph "hadamard"') and out.count("->") == 9
    assert main(["render", files["h"], "--merge"]) == 0
    assert capsys.readouterr().out.count("->") == 4


def test_compile_then_unitary(files, capsys):
    out = str(files["dir"] / "c.sqtm")
    assert main(["compile", files["c"], "-m", "10", "-o", out]) == 0
    assert main(["unitary", out, "--cells", "2", "--format", "tree"]) == 0
    doc = json.loads(capsys.readouterr().out)
    u = np.array([[complex(*z) for z in row] for row in doc["matrix"]])
    c = parse_circuit(open(files["c"]).read())
    assert compare(u, circuit_unitary(c))[0] <= np.pi / 2 ** 10 + 1e-6
    assert main(["unitary", out, "--cells", "2"]) == 0
    assert capsys.readouterr().out.startswith("steps: ")


def test_sr_check(files, capsys):
    assert main(["sr-check", files["h"], "--cells", "3"]) == 0
    assert "uniform_steps: True" in capsys.readouterr().out


def test_nt(files, capsys, tmp_path):
    (tmp_path / "x.txt").write_text("0 1\n1 0\n")
    assert main(["nt", "decompose", str(tmp_path / "x.txt")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(l.split()[0] in ("phase", "rot") for l in lines)
    assert main(["nt", "synthesize", "rot 4 0 3 pi/2", "-m", "4"]) == 0
    assert parse_circuit(capsys.readouterr().out).n == 2
    assert main(["nt", "encode", "rot 2 0 1 pi/2", "-n", "1", "-m", "2"]) == 0
    assert capsys.readouterr().out == "e: 101\nr: 01\n"
    assert main(["nt", "universal", "-n", "1", "-m", "2"]) == 0
    assert qstd.parse_machine(capsys.readouterr().out).name.startswith("universal")
    (tmp_path / "y.txt").write_text("1 1\n1 1\n")
    assert main(["nt", "decompose", str(tmp_path / "y.txt")]) == 1


def test_parse_input():
    assert parse_input("#01") == ("#", "0", "1")
    assert parse_input("0.6:#0,-0.8i:#1") == {"#0": 0.6, "#1": -0.8j}


@pytest.mark.skipif(shutil.which("srqtm") is None, reason="console script not installed")
def test_console_script(files):
    out = subprocess.run(["srqtm", "check", files["h"]], capture_output=True, text=True)
    assert out.returncode == 0
