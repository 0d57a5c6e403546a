"""Probe cost and discovery of searching-ordinary-backwards as the start hop varies."""

import argparse

from backtrace.dataset import SynthParams, generate_synthetic
from backtrace.metrics import comparison_table, incomplete_path_distribution
from backtrace.probing import ProbeParams, run_searching_ordinary_backwards, run_standard, tune_h


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--hs", type=int, nargs="+", default=list(range(2, 25, 2)))
    args = ap.parse_args()

    ts = generate_synthetic(SynthParams(n_destinations=args.n, seed=args.seed))
    p = ProbeParams()
    std = run_standard(ts, p)
    hist = incomplete_path_distribution(ts)
    print("incomplete last-hop histogram:", hist)
    print("tuned h:", tune_h(ts, p.warmup_for(len(ts)), p))
    print(f"{'h':>4}{'probes':>10}{'mean visits':>13}{'prop. missed':>14}")
    for h in args.hs:
        r = run_searching_ordinary_backwards(ts, p, h=h)
        row = comparison_table([r], std)[0]
        print(f"{h:>4}{r.probes_sent:>10}{row.mean_visits:>13.2f}{row.prop_missed:>14.4f}")


if __name__ == "__main__":
    main()
