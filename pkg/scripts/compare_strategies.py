"""Mean visits vs. proportion missed for every strategy, over several seeds.

    python scripts/compare_strategies.py --seeds 10 --n 5000
"""

import argparse
import statistics

from backtrace.dataset import SynthParams, generate_synthetic
from backtrace.metrics import comparison_table, missed_report
from backtrace.probing import (
    ProbeParams,
    run_ordinary_backwards,
    run_pure_backwards,
    run_searching,
    run_searching_ordinary_backwards,
    run_standard,
    tune_h,
)


def one_seed(params: SynthParams, probe: ProbeParams):
    ts = generate_synthetic(params)
    std = run_standard(ts, probe)
    h = tune_h(ts, probe.warmup_for(len(ts)), probe)
    silent = ts.subset(lambda p: not p.dest_responded)
    results = [
        std,
        run_searching(silent, h, probe),
        run_searching_ordinary_backwards(ts, probe),
        run_pure_backwards(ts, probe),
        run_ordinary_backwards(ts, probe),
    ]
    rows = comparison_table(results, std)
    links = {r.strategy_name: missed_report(r, std).pct_links_missed for r in results}
    return rows, links


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--probes-per-hop", type=int, default=1)
    ap.add_argument("--branching", type=float, default=SynthParams.branching_factor)
    ap.add_argument("--forward-stop", action="store_true")
    args = ap.parse_args()

    probe = ProbeParams(probes_per_hop=args.probes_per_hop, forward_stop=args.forward_stop)
    table: dict[str, list] = {}
    for seed in range(args.seeds):
        rows, links = one_seed(SynthParams(n_destinations=args.n, branching_factor=args.branching, seed=seed), probe)
        for row in rows:
            table.setdefault(row.strategy_name, []).append((row.mean_visits, row.prop_missed, links[row.strategy_name]))

    print(f"{'strategy':<30}{'mean visits':>12}{'prop. missed':>14}{'% links missed':>16}")
    for name, vals in table.items():
        mv, pm, lk = (statistics.mean(v) for v in zip(*vals))
        print(f"{name:<30}{mv:>12.2f}{pm:>14.4f}{lk:>16.2f}")


if __name__ == "__main__":
    main()
