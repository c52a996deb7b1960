"""Wall-clock self-speedup of one synthetic circuit over thread counts."""
import argparse
import os
import time

from _common import int_list, write_csv

from segopt.optimizer import OptimizerConfig, optimize_circuit
from segopt.oracle import BuiltinOracle
from segopt.synth import SynthParams, synthetic_circuit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gates", type=int, default=1_000_000)
    ap.add_argument("--threads", type=int_list, default=None, help="default: 1,2,4,... up to cpu_count")
    ap.add_argument("--omega", type=int, default=200)
    ap.add_argument("--executor", default="auto")
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--seed", type=int, default=9)
    ap.add_argument("--out")
    args = ap.parse_args()

    cores = os.cpu_count() or 1
    threads = args.threads or sorted({1, *[2 ** k for k in range(1, 8) if 2 ** k <= cores], cores})
    gates = synthetic_circuit(SynthParams(num_qubits=8, num_gates=args.gates, seed=args.seed))
    rows = []
    base = None
    for t in threads:
        best = float("inf")
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            res = optimize_circuit(BuiltinOracle(), gates, 8,
                        OptimizerConfig(omega=args.omega, threads=t, executor=args.executor, collect_stats=False))
            best = min(best, time.perf_counter() - t0)
        base = base or best
        rows.append(dict(threads=t, seconds=round(best, 3), speedup=round(base / best, 3),
                         rounds=res.num_rounds, oracle_calls=res.oracle_calls, cores=cores))
        print(rows[-1], flush=True)
    write_csv(rows, args.out)


if __name__ == "__main__":
    main()
