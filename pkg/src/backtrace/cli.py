"""Command line front end: ``gen``, ``run`` and ``quantiles``.

Exit status is 0 on success, 1 on usage errors and 2 on data or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import metrics
from .dataset import SynthParams, TraceFormatError, TraceSet, generate_synthetic, read_trace_file, save_trace_file
from .probing import (
    ORDINARY_BACKWARDS,
    PURE_BACKWARDS,
    SEARCHING,
    SEARCHING_ORDINARY_BACKWARDS,
    STRATEGIES,
    ProbeParams,
    StrategyResult,
    run_ordinary_backwards,
    run_pure_backwards,
    run_searching,
    run_searching_ordinary_backwards,
    run_standard,
    tune_h,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
PAPER_SCALE_N = 50_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_seed() -> int:
    raw = os.environ.get("BACKTRACE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"BACKTRACE_SEED is not an integer: {raw!r}") from None


@dataclass(frozen=True)
class RunConfig:
    input_path: Optional[Path]
    synth: Optional[SynthParams]
    strategy: str
    probe_params: ProbeParams
    h: Optional[int]
    shuffle_seed: Optional[int]
    out_dir: Path

    def __post_init__(self):
        if (self.input_path is None) == (self.synth is None):
            raise UsageError("give exactly one of --input FILE or --gen")
        if self.strategy != "all" and self.strategy not in STRATEGIES:
            raise UsageError(f"unknown strategy {self.strategy!r}")
        if self.h is not None and self.h < 1:
            raise UsageError("--h must be >= 1")


# --- csv helpers ------------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def redundancy_csv(r: StrategyResult) -> str:
    dist = metrics.redundancy_distribution(r)
    header = ["distance", "interface_count"] + [name for name, _ in metrics.SUMMARY_POINTS]
    rows = [[ttl, b.interface_count, *b.summary.as_tuple()] for ttl, b in dist.per_distance.items()]
    return _csv_text(header, rows)


def _pct(total: int, discovered: int) -> str:
    return "NA" if total == 0 else f"{metrics.pct_missed(total, discovered):.2f}"


def missed_csv(rep: metrics.MissedReport) -> str:
    header = [
        "total_interfaces", "discovered_interfaces", "pct_interfaces_missed",
        "total_links", "discovered_links", "pct_links_missed",
    ]
    row = [
        rep.total_interfaces, rep.discovered_interfaces, _pct(rep.total_interfaces, rep.discovered_interfaces),
        rep.total_links, rep.discovered_links, _pct(rep.total_links, rep.discovered_links),
    ]
    return _csv_text(header, [row])


def summary_csv(rows, results) -> str:
    by_name = {r.strategy_name: r for r in results}
    out = []
    for row in sorted(rows, key=lambda r: r.strategy_name):
        res = by_name[row.strategy_name]
        mean = "NA" if row.mean_visits is None else f"{row.mean_visits:.2f}"
        out.append([row.strategy_name, mean, f"{row.prop_missed:.4f}", res.probes_sent,
                    len(res.discovered_interfaces), "" if res.h is None else res.h])
    return _csv_text(["strategy", "mean_visits", "prop_missed", "probes_sent", "interfaces", "h"], out)


def incomplete_csv(ts: TraceSet) -> str:
    return _csv_text(["ttl", "count"], sorted(metrics.incomplete_path_distribution(ts).items()))


# --- commands ---------------------------------------------------------------

def cmd_gen(params: SynthParams, out: Path) -> int:
    ts = generate_synthetic(params)
    try:
        save_trace_file(ts, out)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_DATA
    lengths = [len(p) for p in ts]
    incomplete = sum(not p.dest_responded for p in ts)
    print(f"wrote {out}: {len(ts)} paths, mean depth {sum(lengths) / len(lengths):.2f}, "
          f"incomplete fraction {incomplete / len(ts):.3f}")
    return EXIT_OK


def execute(cfg: RunConfig, ts: TraceSet) -> list[StrategyResult]:
    """Run the configured strategies; the standard run always comes first."""
    p = cfg.probe_params
    wanted = STRATEGIES if cfg.strategy == "all" else (cfg.strategy,)
    results = [run_standard(ts, p)]
    for name in wanted:
        if name == PURE_BACKWARDS:
            results.append(run_pure_backwards(ts, p))
        elif name == ORDINARY_BACKWARDS:
            results.append(run_ordinary_backwards(ts, p))
        elif name == SEARCHING:
            h = cfg.h
            if h is None:
                # tuning cost is not charged to the standalone searching run
                h = tune_h(ts, p.warmup_for(len(ts)), p)
            silent = ts.subset(lambda path: not path.dest_responded)
            results.append(run_searching(silent, h, p))
        elif name == SEARCHING_ORDINARY_BACKWARDS:
            results.append(run_searching_ordinary_backwards(ts, p, h=cfg.h))
    return results


def cmd_run(cfg: RunConfig) -> int:
    try:
        if cfg.input_path is not None:
            ts = read_trace_file(cfg.input_path)
        else:
            ts = generate_synthetic(cfg.synth)
    except (OSError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if cfg.shuffle_seed is not None:
        ts = ts.shuffled(cfg.shuffle_seed)

    results = execute(cfg, ts)
    reference = results[0]
    rows = metrics.comparison_table(results, reference)

    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        for r in results:
            _write(cfg.out_dir / f"redundancy_{r.strategy_name}.csv", redundancy_csv(r))
            rep = metrics.missed_report(r, reference)
            _write(cfg.out_dir / f"missed_{r.strategy_name}.csv", missed_csv(rep))
        _write(cfg.out_dir / "summary.csv", summary_csv(rows, results))
        _write(cfg.out_dir / "incomplete.csv", incomplete_csv(ts))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    print(f"{'strategy':<30} {'mean visits':>11} {'prop. missed':>12} {'probes':>10}")
    for row in sorted(rows, key=lambda r: r.strategy_name):
        mean = "NA" if row.mean_visits is None else f"{row.mean_visits:.2f}"
        probes = next(r.probes_sent for r in results if r.strategy_name == row.strategy_name)
        print(f"{row.strategy_name:<30} {mean:>11} {row.prop_missed:>12.4f} {probes:>10}")
    return EXIT_OK


def read_values(path: Path) -> list[int]:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(int(text))
            except ValueError:
                raise TraceFormatError(lineno, f"not an integer: {text!r}") from None
    if not values:
        raise ValueError(f"{path}: no values")
    return values


def cmd_quantiles(values_file: Path, q_list) -> int:
    try:
        values = sorted(read_values(values_file))
    except (OSError, ValueError) as exc:
        print(f"error: {values_file}: {exc}" if isinstance(exc, TraceFormatError) else f"error: {exc}",
              file=sys.stderr)
        return EXIT_DATA
    for q in q_list:
        print(f"{q:g}\t{metrics.quantile(values, q)}")
    return EXIT_OK


# --- argument parsing -------------------------------------------------------

def _fraction(text: str) -> float:
    try:
        q = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= q <= 1.0:
        raise argparse.ArgumentTypeError(f"quantile fraction outside [0, 1]: {text}")
    return q


def _add_synth_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("synthetic data")
    g.add_argument("--n", type=int, default=SynthParams.n_destinations, help="number of destinations")
    g.add_argument("--paper-scale", action="store_true", help=f"use {PAPER_SCALE_N} destinations")
    g.add_argument("--mean-depth", type=float, default=SynthParams.mean_depth)
    g.add_argument("--depth-spread", type=float, default=SynthParams.depth_spread)
    g.add_argument("--branching", type=float, default=SynthParams.branching_factor)
    g.add_argument("--gateways", type=int, default=SynthParams.gateways)
    g.add_argument("--dest-nonresponse", type=float, default=SynthParams.dest_nonresponse_rate)
    g.add_argument("--hop-nonresponse", type=float, default=SynthParams.hop_nonresponse_rate)
    g.add_argument("--seed", type=int, default=None, help="generator seed (default $BACKTRACE_SEED or 0)")
    g.add_argument("--monitor", default=SynthParams.monitor_id)


def _synth_from(args) -> SynthParams:
    seed = args.seed if args.seed is not None else default_seed()
    try:
        return SynthParams(
            n_destinations=PAPER_SCALE_N if args.paper_scale else args.n,
            mean_depth=args.mean_depth,
            depth_spread=args.depth_spread,
            branching_factor=args.branching,
            dest_nonresponse_rate=args.dest_nonresponse,
            hop_nonresponse_rate=args.hop_nonresponse,
            seed=seed,
            gateways=args.gateways,
            monitor_id=args.monitor,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="backtrace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="write a synthetic trace file")
    gen.add_argument("--out", type=Path, required=True)
    _add_synth_args(gen)

    run = sub.add_parser("run", help="replay strategies and write CSV reports")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="trace file")
    src.add_argument("--gen", action="store_true", help="generate a synthetic trace set")
    run.add_argument("--strategy", default="all", choices=STRATEGIES + ("all",))
    run.add_argument("--probes-per-hop", type=int, default=1, help="3 mimics skitter")
    run.add_argument("--gap-limit", type=int, default=3)
    run.add_argument("--warmup", type=int, default=None)
    run.add_argument("--h", type=int, default=None, help="fixed start hop for searching strategies")
    run.add_argument("--forward-stop", action="store_true",
                     help="end searching at a stop-set hit in the forward phase too")
    run.add_argument("--shuffle-seed", type=int, default=None)
    run.add_argument("--out", type=Path, default=Path("out"))
    _add_synth_args(run)

    qs = sub.add_parser("quantiles", help="print quantiles of a file of integers")
    qs.add_argument("values_file", type=Path)
    qs.add_argument("-q", "--q", dest="q_list", type=_fraction, nargs="+",
                    default=[q for _, q in metrics.SUMMARY_POINTS])
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        if args.command == "gen":
            return cmd_gen(_synth_from(args), args.out)
        if args.command == "run":
            try:
                probe_params = ProbeParams(
                    probes_per_hop=args.probes_per_hop,
                    gap_limit=args.gap_limit,
                    warmup_count=args.warmup,
                    forward_stop=args.forward_stop,
                )
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            cfg = RunConfig(
                input_path=args.input,
                synth=_synth_from(args) if args.gen else None,
                strategy=args.strategy,
                probe_params=probe_params,
                h=args.h,
                shuffle_seed=args.shuffle_seed,
                out_dir=args.out,
            )
            return cmd_run(cfg)
        return cmd_quantiles(args.values_file, args.q_list)
    except UsageError as exc:
        print(f"backtrace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
