import csv
import io
import json
import os
import sys

import pytest

from segopt.cli import main
from segopt.gates import H, X
from segopt.qasm import ParsedProgram, parse_qasm, read_qasm, serialize_qasm
from segopt.synth import SynthParams, synthetic_circuit

MOCKS = os.path.join(os.path.dirname(__file__), "mock_oracles")


@pytest.fixture
def circuit_file(tmp_path):
    gates = synthetic_circuit(SynthParams(num_qubits=5, num_gates=1500, density=0.1, seed=8))
    path = tmp_path / "in.qasm"
    path.write_text(serialize_qasm(ParsedProgram(5, gates)))
    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_optimize_shrinks(circuit_file, tmp_path):
    out = tmp_path / "out.qasm"
    assert run("optimize", "--omega", 16, circuit_file, "-o", out) == 0
    before, after = read_qasm(circuit_file), read_qasm(out)
    assert len(after.gates) < len(before.gates)
    assert after.num_qubits == before.num_qubits


def test_optimize_to_stdout(circuit_file, capsys):
    assert run("optimize", "--omega", 16, circuit_file) == 0
    prog = parse_qasm(capsys.readouterr().out)
    assert prog.num_qubits == 5


def test_optimize_empty_program(tmp_path):
    src = tmp_path / "e.qasm"
    src.write_text("OPENQASM 2.0;\nqreg q[2];\n")
    out = tmp_path / "o.qasm"
    assert run("optimize", src, "-o", out) == 0
    assert read_qasm(out).gates == []


def test_threads_byte_identical(circuit_file, tmp_path):
    a, b = tmp_path / "a.qasm", tmp_path / "b.qasm"
    assert run("optimize", "--omega", 16, "--threads", 1, circuit_file, "-o", a) == 0
    assert run("optimize", "--omega", 16, "--threads", 8, circuit_file, "-o", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_exec_oracle(tmp_path):
    src = tmp_path / "in.qasm"
    src.write_text(serialize_qasm(ParsedProgram(2, [H(0), H(0), H(1)] * 4)))
    out = tmp_path / "out.qasm"
    cmd = f"exec:{sys.executable} {os.path.join(MOCKS, 'drop_hh.py')}"
    assert run("optimize", "--omega", 2, "--oracle", cmd, src, "-o", out) == 0
    assert len(read_qasm(out).gates) < 12


def test_exec_oracle_failure_exit_2(circuit_file, tmp_path):
    cmd = f"exec:{sys.executable} {os.path.join(MOCKS, 'fail.py')}"
    assert run("optimize", "--oracle", cmd, circuit_file, "-o", tmp_path / "o.qasm") == 2


def test_exec_oracle_timeout_is_not_fatal(tmp_path):
    src = tmp_path / "in.qasm"
    src.write_text(serialize_qasm(ParsedProgram(1, [H(0), H(0)])))
    out = tmp_path / "out.qasm"
    cmd = f"exec:{sys.executable} {os.path.join(MOCKS, 'sleeper.py')} 5"
    assert run("optimize", "--oracle", cmd, "--oracle-timeout", 0.3, src, "-o", out) == 0
    assert len(read_qasm(out).gates) == 2


def test_parse_error_exit_1(tmp_path):
    bad = tmp_path / "bad.qasm"
    bad.write_text("qreg q[1];\nmeasure q[0];\n")
    assert run("optimize", bad) == 1
    assert run("optimize", tmp_path / "missing.qasm") == 1
    assert run("verify", bad, bad) == 1


def test_max_rounds_exit_3(tmp_path):
    gates = synthetic_circuit(SynthParams(num_qubits=3, num_gates=3000, density=0.3, max_block=40, seed=2))
    src = tmp_path / "in.qasm"
    src.write_text(serialize_qasm(ParsedProgram(3, gates)))
    out = tmp_path / "out.qasm"
    assert run("optimize", "--omega", 4, "--max-rounds", 1, src, "-o", out) == 3
    assert out.exists()


@pytest.mark.parametrize("fmt", ["jsonl", "csv"])
def test_stats_file(circuit_file, tmp_path, fmt, capsys):
    stats = tmp_path / f"stats.{fmt}"
    assert run("optimize", "--omega", 16, "--stats", stats, "--format", fmt, circuit_file,
               "-o", tmp_path / "o.qasm") == 0
    if fmt == "jsonl":
        rows = [json.loads(line) for line in stats.read_text().splitlines()]
    else:
        rows = list(csv.DictReader(io.StringIO(stats.read_text())))
    rounds = [r for r in rows if r["type"] == "round"]
    summary = rows[-1]
    assert summary["type"] == "summary" and len(rounds) >= 1
    assert str(summary["schema_version"]) == "1"
    assert int(summary["total_oracle_calls"]) == sum(int(r["oracle_calls"]) for r in rounds)
    assert int(summary["total_oracle_calls"]) <= int(summary["oracle_call_bound"])
    assert float(summary["reduction_pct"]) > 0
    if fmt == "jsonl":
        assert summary["fingers_trajectory"] == [r["fingers_total"] for r in rounds]
        assert len(summary["potential_trajectory"]) == len(rounds) + 1
    capsys.readouterr()
    assert run("stats", stats) == 0
    text = capsys.readouterr().out
    assert f"rounds: {len(rounds)}" in text and "total_oracle_calls" in text


def test_stats_stable_except_timing(circuit_file, tmp_path):
    timing = {"wall_seconds", "oracle_seconds", "cumulative_oracle_seconds", "seconds", "oracle_time_pct"}
    runs = []
    for k in range(2):
        stats = tmp_path / f"s{k}.jsonl"
        run("optimize", "--omega", 16, "--stats", stats, circuit_file, "-o", tmp_path / f"o{k}.qasm")
        rows = [json.loads(line) for line in stats.read_text().splitlines()]
        runs.append([{k: v for k, v in r.items() if k not in timing} for r in rows])
    assert runs[0] == runs[1]


def test_verify_exit_codes(circuit_file, tmp_path, capsys):
    out = tmp_path / "out.qasm"
    run("optimize", "--omega", 16, circuit_file, "-o", out)
    assert run("verify", "--omega", 16, circuit_file, out) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["locally_optimal"] and report["equivalent"]

    # drop one gate: semantics change, optimality untouched
    prog = read_qasm(out)
    mutant = tmp_path / "mutant.qasm"
    mutant.write_text(serialize_qasm(ParsedProgram(prog.num_qubits, prog.gates[1:])))
    assert run("verify", "--omega", 16, circuit_file, mutant) == 4

    # unoptimized input against itself: equivalent, not locally optimal
    assert run("verify", "--omega", 16, circuit_file, circuit_file) == 5

    # append an H pair: both checks fail
    both = tmp_path / "both.qasm"
    both.write_text(serialize_qasm(ParsedProgram(prog.num_qubits, prog.gates[1:] + [H(0), H(0)])))
    assert run("verify", "--omega", 16, circuit_file, both) == 6


def test_verify_fixpoint_against_itself(tmp_path):
    src = tmp_path / "fix.qasm"
    src.write_text(serialize_qasm(ParsedProgram(1, [H(0), X(0)] * 6)))
    report = tmp_path / "r.json"
    assert run("verify", "--omega", 4, src, src, "--report", report) == 0
    assert json.loads(report.read_text())["locally_optimal"]


def test_bench_thread_sweep(tmp_path):
    out = tmp_path / "bench.csv"
    assert run("bench", "--synthetic", "--sizes", "2000,4000", "--qubits", 4, "--omega", 16,
               "--thread-sweep", "1,2", "--out", out) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 4
    for r in rows:
        assert r["status"] == "ok"
        assert float(r["calls_per_gate"]) == pytest.approx(int(r["oracle_calls"]) / int(r["n"]), rel=1e-4)
    one, two = rows[0], rows[1]
    assert float(one["speedup"]) == 1.0
    assert float(two["speedup"]) == pytest.approx(float(one["seconds"]) / float(two["seconds"]), rel=0.01)


def test_bench_records_row_errors(tmp_path):
    good = tmp_path / "good.qasm"
    good.write_text(serialize_qasm(ParsedProgram(1, [H(0), H(0), H(0)])))
    bad = tmp_path / "bad.qasm"
    bad.write_text("nonsense")
    out = tmp_path / "bench.csv"
    assert run("bench", "--omega", 2, good, bad, "--out", out) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["status"] == "ok" for r in rows] == [True, False]


def test_env_overrides(circuit_file, tmp_path, monkeypatch):
    stats = tmp_path / "s.jsonl"
    monkeypatch.setenv("SEGOPT_OMEGA", "7")
    monkeypatch.setenv("SEGOPT_STATS", str(stats))
    assert run("optimize", circuit_file, "-o", tmp_path / "o.qasm") == 0
    summary = json.loads(stats.read_text().splitlines()[-1])
    assert summary["omega"] == 7
    # explicit flags still win
    assert run("optimize", "--omega", 9, circuit_file, "-o", tmp_path / "o.qasm") == 0
    assert json.loads(stats.read_text().splitlines()[-1])["omega"] == 9
