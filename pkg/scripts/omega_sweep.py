"""Gate reduction, oracle calls and time as the window size grows."""
import argparse

from _common import int_list, write_csv

from segopt.optimizer import OptimizerConfig, optimize_circuit
from segopt.oracle import BuiltinOracle
from segopt.synth import SynthParams, synthetic_circuit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gates", type=int, default=100_000)
    ap.add_argument("--omegas", type=int_list, default=[4, 8, 16, 32, 64, 128, 200, 400])
    ap.add_argument("--max-block", type=int, default=48)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--out")
    args = ap.parse_args()

    gates = synthetic_circuit(SynthParams(num_gates=args.gates, max_block=args.max_block, seed=args.seed))
    rows = []
    for omega in args.omegas:
        res = optimize_circuit(BuiltinOracle(), gates, 8, OptimizerConfig(omega=omega, collect_stats=False))
        rows.append(dict(omega=omega, final_gates=len(res.gates), reduction_pct=round(res.reduction_pct, 3),
                         rounds=res.num_rounds, oracle_calls=res.oracle_calls,
                         seconds=round(res.wall_seconds, 3), oracle_time_pct=round(100 * res.oracle_fraction, 1)))
        print(rows[-1], flush=True)
    write_csv(rows, args.out)


if __name__ == "__main__":
    main()
