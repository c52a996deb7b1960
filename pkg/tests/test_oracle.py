import math
import os
import sys
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segopt.gates import CNOT, RZ, H, X
from segopt.oracle import (
    BuiltinOracle,
    ExternalOracle,
    ExternalOracleConfig,
    IdentityOracle,
    Oracle,
    OracleError,
    OracleTimeout,
    builtin_optimize,
    is_well_behaved_sample,
    make_oracle,
)
from segopt.verifier import check_equivalence

from conftest import gates_strategy, pi_multiples

MOCKS = os.path.join(os.path.dirname(__file__), "mock_oracles")


def mock(name, *args):
    return [sys.executable, os.path.join(MOCKS, name), *args]


opt = BuiltinOracle()


@pytest.mark.parametrize(
    "seg, expected",
    [
        ([H(0), H(0)], []),
        ([X(1), X(1)], []),
        ([CNOT(0, 1), CNOT(0, 1)], []),
        ([CNOT(0, 1), CNOT(1, 0)], [CNOT(0, 1), CNOT(1, 0)]),
        ([RZ(math.pi / 4, 0), RZ(math.pi / 4, 0)], [RZ(math.pi / 2, 0)]),
        ([RZ(math.pi, 0), RZ(math.pi, 0)], []),
        ([RZ(1e-13, 0)], []),
        ([RZ(2 * math.pi - 1e-13, 0)], []),
        ([X(1), CNOT(0, 1), X(1)], [CNOT(0, 1)]),
        ([RZ(0.3, 0), CNOT(0, 1), RZ(-0.3, 0)], [CNOT(0, 1)]),
        ([X(0), CNOT(0, 1), X(0)], [X(0), CNOT(0, 1), X(0)]),
        ([H(0), X(1), H(0)], [X(1)]),
        ([H(0), X(0), H(0)], [H(0), X(0), H(0)]),
        ([H(0), X(0), X(0), H(0)], []),
        ([CNOT(0, 1), H(2), CNOT(0, 1)], [H(2)]),
        ([CNOT(0, 1), RZ(0.2, 0), X(1), CNOT(0, 1)], [RZ(0.2, 0), X(1)]),
    ],
)
def test_rewrite_examples(seg, expected):
    out = opt(3, seg)
    assert out == expected
    assert len(out) <= len(seg)


def test_fused_rz_keeps_earlier_position():
    out = opt(2, [RZ(0.25, 0), H(1), RZ(0.5, 0)])
    assert out == [RZ(0.75, 0), H(1)]


def test_empty_segment():
    assert opt(2, []) == []
    assert IdentityOracle()(2, []) == []


def test_operand_range_checked():
    with pytest.raises(ValueError):
        opt(1, [CNOT(0, 1)])


small_circuits = st.integers(1, 8).flatmap(
    lambda n: st.tuples(st.just(n), gates_strategy(n, max_size=64, angles=pi_multiples | st.floats(0, 7)))
)


@settings(max_examples=300, deadline=None)
@given(small_circuits)
def test_builtin_properties(case):
    n, seg = case
    out = builtin_optimize(n, seg)
    assert len(out) <= len(seg)
    assert builtin_optimize(n, out) == out
    assert builtin_optimize(n, list(seg)) == out
    ok, dev = check_equivalence(n, seg, out, tol=1e-9)
    assert ok, dev


@settings(max_examples=100, deadline=None)
@given(small_circuits)
def test_identity_oracle(case):
    n, seg = case
    assert IdentityOracle()(n, seg) == seg


# ---------------------------------------------------------------------------
# external oracle


def test_config_parsing():
    cfg = ExternalOracleConfig("python3 -m foo --flag 'a b'")
    assert cfg.command == ["python3", "-m", "foo", "--flag", "a b"]
    with pytest.raises(ValueError):
        ExternalOracleConfig("")
    with pytest.raises(ValueError):
        ExternalOracleConfig("x", timeout=0)
    with pytest.raises(ValueError):
        ExternalOracleConfig("x", transport="pigeon")


def test_make_oracle():
    assert isinstance(make_oracle("builtin"), BuiltinOracle)
    assert isinstance(make_oracle("identity"), IdentityOracle)
    ext = make_oracle("exec:cat -", timeout=3, transport="temp_files")
    assert isinstance(ext, ExternalOracle)
    assert ext.cfg.timeout == 3 and ext.cfg.command == ["cat", "-"]
    with pytest.raises(ValueError):
        make_oracle("quantum-magic")


SEG = [H(0), H(0), CNOT(0, 1), RZ(0.1, 1)]


@pytest.mark.parametrize("transport", ["stdin_stdout", "temp_files"])
def test_external_echo(transport):
    ora = ExternalOracle(ExternalOracleConfig(mock("echo.py"), transport=transport))
    assert ora(2, SEG) == SEG


def test_external_placeholders():
    cmd = mock("echo.py") + ["{input}", "{output}"]
    ora = ExternalOracle(ExternalOracleConfig(cmd, transport="temp_files"))
    assert ora(2, SEG) == SEG


def test_external_cat():
    ora = make_oracle("exec:cat")
    assert ora(2, SEG) == SEG


def test_external_rewrites():
    ora = ExternalOracle(ExternalOracleConfig(mock("drop_hh.py")))
    assert ora(2, SEG) == SEG[2:]


def test_external_timeout():
    ora = ExternalOracle(ExternalOracleConfig(mock("sleeper.py", "10"), timeout=0.5))
    t0 = time.perf_counter()
    with pytest.raises(OracleTimeout):
        ora(2, SEG)
    assert time.perf_counter() - t0 < 5


@pytest.mark.parametrize(
    "script, fragment",
    [("fail.py", "status 3"), ("garbage.py", "unparseable"), ("wide.py", "64 qubits")],
)
def test_external_failures(script, fragment):
    ora = ExternalOracle(ExternalOracleConfig(mock(script)))
    with pytest.raises(OracleError) as info:
        ora(2, SEG)
    assert fragment in str(info.value)
    assert not isinstance(info.value, OracleTimeout)


def test_external_missing_binary():
    ora = make_oracle("exec:/nonexistent/optimizer")
    with pytest.raises(OracleError, match="cannot start"):
        ora(2, SEG)


def test_external_missing_output_file():
    ora = ExternalOracle(ExternalOracleConfig(["true"], transport="temp_files"))
    with pytest.raises(OracleError, match="no output file"):
        ora(2, SEG)


def test_external_concurrency_cap():
    ora = ExternalOracle(ExternalOracleConfig(mock("echo.py"), max_concurrency=1))
    assert ora(2, SEG) == SEG


# ---------------------------------------------------------------------------
# well-behavedness sampling


class ShortSightedOracle(Oracle):
    """Only cancels pairs in segments of at most four gates; not well-behaved."""

    def optimize_segment(self, num_qubits, gates):
        if len(gates) > 4:
            return list(gates)
        return builtin_optimize(num_qubits, gates)


def test_builtin_well_behaved():
    report = is_well_behaved_sample(BuiltinOracle(), trials=100, seed=7)
    assert report.ok
    assert report.windows_checked > 100


def test_identity_well_behaved():
    assert is_well_behaved_sample(IdentityOracle(), trials=20, seed=0).ok


def test_short_sighted_oracle_caught():
    report = is_well_behaved_sample(ShortSightedOracle(), trials=50, seed=1, num_qubits=2)
    assert not report.ok
    cx = report.counterexamples[0]
    i, j = cx.window
    assert cx.reduced_to < j - i
    assert len(report.counterexamples) <= 10


def test_sampling_validates():
    with pytest.raises(ValueError):
        is_well_behaved_sample(IdentityOracle(), trials=0, seed=0)
