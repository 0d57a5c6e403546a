"""Replay single-monitor route tracing strategies over recorded or synthetic traces."""

from .dataset import SynthParams, TraceSet, generate_synthetic, parse_trace_file, write_trace_file
from .model import RecordedPath, classify_address, effective_response, last_responding_hop
from .probing import (
    ProbeParams,
    StrategyResult,
    VisitLog,
    probe,
    run_ordinary_backwards,
    run_pure_backwards,
    run_searching,
    run_searching_ordinary_backwards,
    run_standard,
    tune_h,
)

__all__ = [
    "ProbeParams", "RecordedPath", "StrategyResult", "SynthParams", "TraceSet", "VisitLog",
    "classify_address", "effective_response", "generate_synthetic", "last_responding_hop",
    "parse_trace_file", "probe", "run_ordinary_backwards", "run_pure_backwards", "run_searching",
    "run_searching_ordinary_backwards", "run_standard", "tune_h", "write_trace_file",
]
