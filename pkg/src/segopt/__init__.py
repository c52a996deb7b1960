"""Parallel, locally-optimal quantum circuit optimization over a pluggable segment oracle."""

from .circuit import Circuit, Segment
from .gates import CNOT, RZ, Gate, H, Kind, X
from .optimizer import OptimizeResult, OptimizerConfig, RoundStats, optimize_circuit
from .oracle import BuiltinOracle, ExternalOracle, ExternalOracleConfig, IdentityOracle, Oracle, make_oracle
from .qasm import ParsedProgram, parse_qasm, serialize_qasm

__version__ = "0.1.0"

__all__ = [
    "Circuit", "Segment", "Gate", "Kind", "H", "X", "CNOT", "RZ",
    "OptimizerConfig", "OptimizeResult", "RoundStats", "optimize_circuit",
    "Oracle", "BuiltinOracle", "IdentityOracle", "ExternalOracle", "ExternalOracleConfig", "make_oracle",
    "ParsedProgram", "parse_qasm", "serialize_qasm",
]
