import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from conftest import EXAMPLE, ghz
from limqsp.circuit import from_json, is_transpiled
from limqsp.cli import BENCH_COLUMNS, main, preparation_fidelity
from limqsp.stateio import StateFileError, dump_state, load_state, parse_state


@pytest.fixture
def files(tmp_path):
    (tmp_path / "example.json").write_text(dump_state(EXAMPLE))
    (tmp_path / "ghz12.json").write_text(dump_state(ghz(12), sparse=True))
    (tmp_path / "one.json").write_text(json.dumps({"num_qubits": 0, "amplitudes": [[1, 0]]}))
    (tmp_path / "zero.json").write_text(json.dumps({"amplitudes": [[0, 0], [0, 0]]}))
    (tmp_path / "bad.json").write_text("{not json")
    return tmp_path


def test_state_file_formats():
    dense = parse_state(json.loads(dump_state(EXAMPLE)))
    assert np.allclose(dense, EXAMPLE)
    sparse = parse_state({"format": "sparse", "entries": [["11", [0, 1]], ["00", [2, 0]]]})
    assert np.allclose(sparse, [2, 0, 0, 1j])
    assert np.allclose(parse_state(json.loads(dump_state(ghz(3), sparse=True))), ghz(3))
    for bad in (
        {"amplitudes": [[1, 0]] * 3},
        {"num_qubits": 2, "amplitudes": [[1, 0]] * 2},
        {"format": "sparse", "entries": [["012", [1, 0]]]},
        {"format": "ternary"},
        {"amplitudes": [[1, 0, 0]]},
        [1, 2],
    ):
        with pytest.raises(StateFileError):
            parse_state(bad)


def test_load_state_errors(files):
    with pytest.raises(StateFileError):
        load_state(str(files / "bad.json"))
    with pytest.raises(OSError):
        load_state(str(files / "missing.json"))


def test_synth_verify_example(files, capsys):
    out = files / "c.json"
    assert main(["synth", "--input", str(files / "example.json"), "--algo", "noanc", "--verify", "--output", str(out)]) == 0
    assert "fidelity 1.000000000000" in capsys.readouterr().out
    c = from_json(out.read_text())
    assert preparation_fidelity(c, EXAMPLE) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("algo", ["noanc", "one", "full", "budget"])
@pytest.mark.parametrize("group", ["scalar", "pauli", "xp"])
def test_synth_all_algorithms_round_trip(files, algo, group):
    out = files / f"{algo}-{group}.json"
    args = ["synth", "--input", str(files / "example.json"), "--algo", algo, "--group", group, "--output", str(out), "--verify"]
    if algo == "budget":
        args += ["--ancillas", "3"]
    assert main(args) == 0
    assert preparation_fidelity(from_json(out.read_text()), EXAMPLE) >= 1 - 1e-10


def test_synth_transpile_and_qasm(files):
    out, qasm = files / "t.json", files / "t.qasm"
    rc = main(["synth", "--input", str(files / "example.json"), "--algo", "budget", "--ancillas", "4",
               "--transpile", "--verify", "--output", str(out), "--qasm", str(qasm)])
    assert rc == 0
    c = from_json(out.read_text())
    assert is_transpiled(c) and c.ancillas == 4
    text = qasm.read_text()
    assert text.startswith("OPENQASM 2.0;") and "qreg anc[4];" in text


def test_synth_stats_ghz(files):
    st = files / "s.json"
    rc = main(["synth", "--input", str(files / "ghz12.json"), "--algo", "one", "--stats", str(st), "--output", str(files / "c.json")])
    assert rc == 0
    data = json.loads(st.read_text())
    assert data["reduced_paths"] == 1 and data["total_nodes"] == 13


def test_synth_usage_errors(files):
    base = ["synth", "--input", str(files / "example.json"), "--output", str(files / "c.json")]
    assert main(base + ["--algo", "budget", "--ancillas", "0"]) == 2
    assert main(base + ["--algo", "budget"]) == 2
    assert main(base + ["--algo", "one", "--ancillas", "3"]) == 2
    assert main(base + ["--algo", "wizard"]) == 2
    assert main(["synth"]) == 2


def test_synth_io_errors(files):
    for name in ("missing.json", "bad.json", "zero.json"):
        assert main(["synth", "--input", str(files / name), "--algo", "noanc", "--output", str(files / "c.json")]) == 3
    assert main(["synth", "--input", str(files / "example.json"), "--algo", "noanc",
                 "--output", str(files / "nodir" / "c.json")]) == 3


def test_synth_verify_above_cap(files, monkeypatch):
    monkeypatch.setenv("QSP_VERIFY_CAP", "2")
    args = ["synth", "--input", str(files / "example.json"), "--algo", "noanc", "--output", str(files / "c.json")]
    assert main(args + ["--verify"]) == 2
    assert main(args) == 0


def test_inspect(files, capsys):
    assert main(["inspect", "--input", str(files / "example.json"), "--dot", str(files / "d.dot")]) == 0
    xp = json.loads(capsys.readouterr().out)
    assert (xp["total_nodes"], xp["reduced_paths"]) == (6, 3)
    assert (files / "d.dot").read_text().startswith("digraph")
    assert main(["inspect", "--input", str(files / "example.json"), "--group", "scalar"]) == 0
    sc = json.loads(capsys.readouterr().out)
    assert sc["total_nodes"] > xp["total_nodes"]
    assert main(["inspect", "--input", str(files / "one.json")]) == 0
    one = json.loads(capsys.readouterr().out)
    assert (one["total_nodes"], one["reduced_paths"]) == (1, 1)
    assert main(["inspect", "--input", str(files / "missing.json")]) == 3


def _bench(tmp_path, name, *extra):
    out = tmp_path / name
    rc = main(["bench", "--qubits", "3..4", "--samples", "3", "--seed", "7",
               "--algos", "noanc,one,full,budget:3", "--out", str(out), *extra])
    return rc, out


def test_bench_rows_and_determinism(tmp_path, capsys):
    rc, a = _bench(tmp_path, "a.csv", "--transpile", "--baseline")
    assert rc == 0
    _, b = _bench(tmp_path, "b.csv", "--transpile", "--baseline")
    _, c = _bench(tmp_path, "c.csv", "--transpile", "--baseline", "--jobs", "2")
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    rows = list(csv.DictReader(a.open()))
    assert list(rows[0].keys()) == BENCH_COLUMNS
    assert len(rows) == 2 * 3 * 4
    assert [(r["n"], r["sample"], r["algo"]) for r in rows] == sorted(
        ((r["n"], r["sample"], r["algo"]) for r in rows),
        key=lambda t: (int(t[0]), int(t[1]), ["noanc", "one", "full", "budget:3"].index(t[2])))
    assert all(r["status"] == "ok" and float(r["fidelity"]) >= 1 - 1e-8 for r in rows)
    assert all(int(r["baseline_blocks"]) == 2 ** int(r["n"]) - 1 for r in rows)
    assert "median_gates" in capsys.readouterr().out


def test_bench_timings_and_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("QSP_VERIFY_CAP", "3")
    rc, out = _bench(tmp_path, "t.csv", "--timings")
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    assert all(float(r["synth_ms"]) >= 0 for r in rows)
    assert {r["status"] for r in rows if r["n"] == "4"} == {"unverified"}
    assert all(r["fidelity"] == "" for r in rows if r["n"] == "4")


def test_bench_usage_errors(tmp_path):
    base = ["bench", "--qubits", "3..3", "--samples", "1", "--out", str(tmp_path / "x.csv")]
    assert main(base + ["--algos", "budget"]) == 2
    assert main(base + ["--algos", "budget:0"]) == 2
    assert main(base + ["--algos", "one:2"]) == 2
    assert main(base + ["--algos", "fast"]) == 2
    assert main(["bench", "--qubits", "x..y", "--out", str(tmp_path / "x.csv")]) == 2


@pytest.mark.skipif(shutil.which("limqsp") is None, reason="console script not installed")
def test_console_script(files):
    r = subprocess.run(["limqsp", "inspect", "--input", str(files / "example.json")], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["reduced_paths"] == 3
    r = subprocess.run(["limqsp", "synth", "--input", "x", "--algo", "budget", "--ancillas", "0", "--output", "y"],
                       capture_output=True, text=True)
    assert r.returncode == 2
