"""Oracle calls per gate across circuit sizes; should stay roughly flat."""
import argparse

from _common import int_list, write_csv

from segopt.optimizer import OptimizerConfig, optimize_circuit, potential_bound
from segopt.oracle import BuiltinOracle
from segopt.synth import SynthParams, synthetic_circuit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int_list, default=[10_000, 30_000, 100_000, 300_000, 1_000_000])
    ap.add_argument("--omegas", type=int_list, default=[32, 200])
    ap.add_argument("--qubits", type=int, default=8)
    ap.add_argument("--density", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = []
    for omega in args.omegas:
        for n in args.sizes:
            gates = synthetic_circuit(SynthParams(num_qubits=args.qubits, num_gates=n, density=args.density,
                                                  seed=args.seed))
            res = optimize_circuit(BuiltinOracle(), gates, args.qubits, OptimizerConfig(omega=omega, collect_stats=False))
            rows.append(dict(n=n, omega=omega, oracle_calls=res.oracle_calls,
                             calls_per_gate=round(res.oracle_calls / n, 6),
                             bound=potential_bound(n, omega), rounds=res.num_rounds,
                             seconds=round(res.wall_seconds, 3)))
            print(rows[-1], flush=True)
    write_csv(rows, args.out)


if __name__ == "__main__":
    main()
