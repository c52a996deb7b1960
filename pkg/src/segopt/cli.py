"""Command-line front end: ``segopt optimize | verify | bench | stats``.

Exit codes
    0  success
    1  input could not be read or parsed
    2  oracle failure (spawn error, bad exit status, unparseable reply)
    3  optimize: round cap reached before convergence (output still written)
    4  verify: circuits are not equivalent
    5  verify: optimized circuit is not locally optimal
    6  verify: both 4 and 5

Every flag can also be set through an environment variable named
``SEGOPT_<FLAG>`` (e.g. ``SEGOPT_OMEGA=64``); explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .oracle import OracleError, make_oracle
from .optimizer import OptimizerConfig, default_threads, optimize_circuit
from .qasm import ParsedProgram, QasmError, read_qasm, serialize_qasm
from .synth import SynthParams, synthetic_circuit
from .verifier import DEFAULT_QUBIT_CAP, verify

log = logging.getLogger("segopt")

STATS_SCHEMA_VERSION = 1
ENV_PREFIX = "SEGOPT_"

EXIT_OK, EXIT_PARSE, EXIT_ORACLE, EXIT_NOT_CONVERGED = 0, 1, 2, 3
EXIT_NOT_EQUIVALENT, EXIT_NOT_OPTIMAL, EXIT_BOTH = 4, 5, 6

ROUND_FIELDS = [
    "round", "fingers_total", "fingers_selected", "oracle_calls", "improved", "timeouts",
    "gates_removed", "gates_remaining", "potential_before", "potential", "min_selected_gap",
    "wall_seconds", "oracle_seconds", "cumulative_oracle_seconds",
]
SUMMARY_FIELDS = [
    "input", "num_qubits", "omega", "oracle", "threads", "seed", "initial_gates", "final_gates",
    "reduction_pct", "rounds", "total_oracle_calls", "oracle_call_bound", "converged",
    "seconds", "oracle_time_pct",
]
BENCH_FIELDS = [
    "benchmark", "n", "omega", "threads", "seconds", "rounds", "oracle_calls", "calls_per_gate",
    "final_gates", "reduction_pct", "oracle_time_pct", "speedup", "status",
]


@dataclass
class RunManifest:
    input: Optional[str]
    output: Optional[str]
    omega: int
    oracle: str
    threads: int
    seed: int
    stats: Optional[str]
    format: str


def _env(name: str, default=None, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper())
    if raw is None:
        return default
    return cast(raw)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega", type=int, default=_env("omega", 200, int), help="window size (default 200)")
    p.add_argument("--oracle", default=_env("oracle", "builtin"), help="builtin | identity | exec:CMD")
    p.add_argument("--oracle-timeout", type=float, default=_env("oracle_timeout", 60.0, float),
                   help="seconds per external oracle call")
    p.add_argument("--transport", choices=("stdin_stdout", "temp_files"),
                   default=_env("transport", "stdin_stdout"))
    p.add_argument("--threads", type=int, default=_env("threads", 1, int))
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segopt", description=__doc__.split("\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter, epilog=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="optimize a QASM circuit")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="output QASM path (default: stdout)")
    _add_common(p)
    p.add_argument("--max-rounds", type=int, default=_env("max_rounds", None, int))
    p.add_argument("--stats", default=_env("stats"), help="write per-round stats here")
    p.add_argument("--format", choices=("csv", "jsonl"), default=_env("format", "jsonl"))

    p = sub.add_parser("verify", help="check local optimality and equivalence")
    p.add_argument("original")
    p.add_argument("optimized")
    _add_common(p)
    p.add_argument("--qubit-cap", type=int, default=_env("qubit_cap", DEFAULT_QUBIT_CAP, int))
    p.add_argument("--tol", type=float, default=_env("tol", 1e-9, float))
    p.add_argument("--report", help="write the JSON report here instead of stdout")

    p = sub.add_parser("bench", help="timing / scaling sweeps")
    p.add_argument("inputs", nargs="*", help="QASM files or directories")
    _add_common(p)
    p.add_argument("--synthetic", action="store_true", help="use generated circuits")
    p.add_argument("--sizes", default=_env("sizes", "10000"), help="comma-separated gate counts")
    p.add_argument("--thread-sweep", default=_env("thread_sweep", None), help="comma-separated thread counts")
    p.add_argument("--qubits", type=int, default=_env("qubits", 8, int))
    p.add_argument("--density", type=float, default=_env("density", 0.05, float))
    p.add_argument("--max-block", type=int, default=_env("max_block", 16, int))
    p.add_argument("--out", default=_env("out"), help="CSV path (default: stdout)")

    p = sub.add_parser("stats", help="summarize a stats file written by optimize")
    p.add_argument("path")
    return parser


# ---------------------------------------------------------------------------


def _write_rows(path: Optional[str], rows: List[dict], fmt: str, fields: Sequence[str]) -> None:
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        if fmt == "jsonl":
            for row in rows:
                out.write(json.dumps(row) + "\n")
        else:
            w = csv.DictWriter(out, fieldnames=list(fields), extrasaction="ignore")
            w.writeheader()
            w.writerows(rows)
    finally:
        if path:
            out.close()


def _oracle_from(args):
    return make_oracle(args.oracle, timeout=args.oracle_timeout, transport=args.transport,
                       max_concurrency=args.threads)


def cmd_optimize(args) -> int:
    manifest = RunManifest(args.input, args.output, args.omega, args.oracle, args.threads, args.seed,
                           args.stats, args.format)
    try:
        program = read_qasm(args.input)
    except (OSError, QasmError) as e:
        log.error("cannot read %s: %s", args.input, e)
        return EXIT_PARSE
    if not program.gates:
        text = serialize_qasm(program)
        result = None
    else:
        cfg = OptimizerConfig(omega=args.omega, max_rounds=args.max_rounds, threads=args.threads)
        try:
            result = optimize_circuit(_oracle_from(args), program.gates, program.num_qubits, cfg)
        except OracleError as e:
            log.error("oracle failure: %s", e)
            return EXIT_ORACLE
        text = serialize_qasm(ParsedProgram(program.num_qubits, result.gates))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    if result is not None:
        summary = {
            "type": "summary",
            "schema_version": STATS_SCHEMA_VERSION,
            "input": manifest.input,
            "num_qubits": program.num_qubits,
            "omega": manifest.omega,
            "oracle": manifest.oracle,
            "threads": manifest.threads,
            "seed": manifest.seed,
            "initial_gates": result.initial_gates,
            "final_gates": len(result.gates),
            "reduction_pct": round(result.reduction_pct, 4),
            "rounds": result.num_rounds,
            "total_oracle_calls": result.oracle_calls,
            "oracle_call_bound": result.oracle_call_bound,
            "converged": result.converged,
            "seconds": round(result.wall_seconds, 6),
            "oracle_time_pct": round(100 * result.oracle_fraction, 3),
            "fingers_trajectory": [r.fingers_total for r in result.rounds],
            "potential_trajectory": [r.potential_before for r in result.rounds]
            + ([result.rounds[-1].potential] if result.rounds else []),
        }
        log.info("%d -> %d gates (%.2f%%) in %d rounds, %d oracle calls, %.2fs",
                 result.initial_gates, len(result.gates), result.reduction_pct, result.num_rounds,
                 result.oracle_calls, result.wall_seconds)
        if args.stats:
            rows = [dict(type="round", schema_version=STATS_SCHEMA_VERSION, **r.as_row()) for r in result.rounds]
            if args.format == "csv":
                _write_rows(args.stats, rows + [summary], "csv",
                            ["type", "schema_version"] + ROUND_FIELDS + SUMMARY_FIELDS)
            else:
                _write_rows(args.stats, rows + [summary], "jsonl", [])
        if not result.converged:
            log.error("stopped after %d rounds without converging", result.num_rounds)
            return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        original = read_qasm(args.original)
        optimized = read_qasm(args.optimized)
    except (OSError, QasmError) as e:
        log.error("cannot read input: %s", e)
        return EXIT_PARSE
    n = max(original.num_qubits, optimized.num_qubits)
    try:
        report = verify(_oracle_from(args), n, original.gates, optimized.gates, args.omega,
                        tol=args.tol, cap=args.qubit_cap)
    except OracleError as e:
        log.error("oracle failure: %s", e)
        return EXIT_ORACLE
    data = report.as_dict()
    data["schema_version"] = STATS_SCHEMA_VERSION
    data["omega"] = args.omega
    text = json.dumps(data, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    bad_eq = report.equivalent is False
    bad_opt = not report.locally_optimal
    if bad_eq and bad_opt:
        return EXIT_BOTH
    if bad_eq:
        return EXIT_NOT_EQUIVALENT
    if bad_opt:
        return EXIT_NOT_OPTIMAL
    return EXIT_OK


def _bench_inputs(args):
    if args.synthetic:
        for size in (int(s) for s in args.sizes.split(",")):
            params = SynthParams(num_qubits=args.qubits, num_gates=size, density=args.density,
                                 max_block=args.max_block, seed=args.seed)

            def load(p=params):
                return p.num_qubits, synthetic_circuit(p)
            yield f"synthetic-q{args.qubits}-n{size}-s{args.seed}", load
        return
    paths = []
    for item in args.inputs:
        p = Path(item)
        paths.extend(sorted(p.glob("*.qasm")) if p.is_dir() else [p])
    for p in paths:
        def load(p=p):
            prog = read_qasm(p)
            return prog.num_qubits, prog.gates
        yield str(p), load


def cmd_bench(args) -> int:
    threads = [int(t) for t in args.thread_sweep.split(",")] if args.thread_sweep else [args.threads]
    oracle = _oracle_from(args)
    rows = []
    for name, load in _bench_inputs(args):
        try:
            num_qubits, gates = load()
        except Exception as e:  # per-row failure, keep going
            rows.append({"benchmark": name, "status": f"error: {e}"})
            continue
        base = None
        for t in threads:
            row = {"benchmark": name, "n": len(gates), "omega": args.omega, "threads": t}
            try:
                t0 = time.perf_counter()
                res = optimize_circuit(oracle, gates, num_qubits, OptimizerConfig(omega=args.omega, threads=t))
                secs = time.perf_counter() - t0
            except Exception as e:
                row["status"] = f"error: {e}"
                rows.append(row)
                continue
            if t == 1:
                base = secs
            row.update(
                seconds=round(secs, 4),
                rounds=res.num_rounds,
                oracle_calls=res.oracle_calls,
                calls_per_gate=round(res.oracle_calls / len(gates), 6),
                final_gates=len(res.gates),
                reduction_pct=round(res.reduction_pct, 4),
                oracle_time_pct=round(100 * res.oracle_seconds / secs, 3) if secs else 0.0,
                speedup=round(base / secs, 4) if base else "",
                status="ok",
            )
            rows.append(row)
            log.info("%s threads=%d: %.2fs, %d rounds", name, t, secs, res.num_rounds)
    _write_rows(args.out, rows, "csv", BENCH_FIELDS)
    return EXIT_OK


def cmd_stats(args) -> int:
    path = Path(args.path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        log.error("%s", e)
        return EXIT_PARSE
    if text.lstrip().startswith("{"):
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    else:
        rows = list(csv.DictReader(text.splitlines()))
    rounds = [r for r in rows if r.get("type") == "round"]
    summary = next((r for r in rows if r.get("type") == "summary"), {})
    print(f"rounds: {len(rounds)}")
    for key in ("initial_gates", "final_gates", "reduction_pct", "total_oracle_calls", "oracle_call_bound",
                "oracle_time_pct", "seconds", "converged"):
        if key in summary and summary[key] not in ("", None):
            print(f"{key}: {summary[key]}")
    if rounds:
        print("fingers: " + " ".join(str(r["fingers_total"]) for r in rounds))
    return EXIT_OK


COMMANDS = {"optimize": cmd_optimize, "verify": cmd_verify, "bench": cmd_bench, "stats": cmd_stats}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) == 0:
        args.threads = default_threads()
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
