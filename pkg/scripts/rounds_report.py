"""Rounds, finger counts and potential per round for a few circuit sizes."""
import argparse

from _common import int_list, write_csv

from segopt.optimizer import OptimizerConfig, optimize_circuit
from segopt.oracle import BuiltinOracle
from segopt.synth import SynthParams, synthetic_circuit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int_list, default=[10_000, 100_000, 1_000_000])
    ap.add_argument("--omega", type=int, default=200)
    ap.add_argument("--max-block", type=int, default=16)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--out", help="per-round CSV")
    args = ap.parse_args()

    rows = []
    for n in args.sizes:
        gates = synthetic_circuit(SynthParams(num_gates=n, max_block=args.max_block, seed=args.seed))
        res = optimize_circuit(BuiltinOracle(), gates, 8, OptimizerConfig(omega=args.omega))
        print(f"n={n}: {res.num_rounds} rounds, {res.oracle_calls} calls, "
              f"{res.reduction_pct:.2f}% reduction, {res.wall_seconds:.1f}s")
        rows.extend(dict(n=n, **r.as_row()) for r in res.rounds)
    write_csv(rows, args.out)


if __name__ == "__main__":
    main()
