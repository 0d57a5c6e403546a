"""Probe replay and the single-monitor tracing strategies.

Every strategy replays probes against the recorded paths of a
:class:`~backtrace.dataset.TraceSet`.  A probe at TTL ``t`` toward a destination
returns the effective reply recorded at hop ``t`` of that destination's path.
Strategies keep a stop set of valid interfaces already seen; backward probing
ends for a destination as soon as a probe returns a member of that set.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .dataset import TraceSet
from .model import Addr, addr_to_text, last_responding_hop

STANDARD = "standard"
PURE_BACKWARDS = "pure-backwards"
ORDINARY_BACKWARDS = "ordinary-backwards"
SEARCHING = "searching"
SEARCHING_ORDINARY_BACKWARDS = "searching-ordinary-backwards"
STRATEGIES = (STANDARD, PURE_BACKWARDS, ORDINARY_BACKWARDS, SEARCHING, SEARCHING_ORDINARY_BACKWARDS)


class StopKind(enum.Enum):
    REACHED_TTL1 = "ReachedTTL1"
    STOP_SET_HIT = "StopSetHit"
    DESTINATION_SKIPPED = "DestinationSkipped"
    NO_RESPONDER = "NoResponder"
    COMPLETED = "Completed"


@dataclass(frozen=True)
class StopReason:
    kind: StopKind
    addr: Optional[Addr] = None

    def __str__(self):
        if self.kind is StopKind.STOP_SET_HIT:
            return f"StopSetHit({addr_to_text(self.addr)})"
        return self.kind.value


REACHED_TTL1 = StopReason(StopKind.REACHED_TTL1)
DESTINATION_SKIPPED = StopReason(StopKind.DESTINATION_SKIPPED)
NO_RESPONDER = StopReason(StopKind.NO_RESPONDER)
COMPLETED = StopReason(StopKind.COMPLETED)


@dataclass
class VisitLog:
    """Visit counters keyed by ``(addr, ttl)`` plus probe totals.

    When ``trace`` is a list, every probe appends ``(destination, ttl)`` to it.
    """

    visits: Counter = field(default_factory=Counter)
    probes_sent: int = 0
    responding_probes: int = 0
    trace: Optional[list] = None

    def interfaces(self) -> set[Addr]:
        return {addr for addr, _ in self.visits}

    def merge(self, other: "VisitLog") -> None:
        self.visits.update(other.visits)
        self.probes_sent += other.probes_sent
        self.responding_probes += other.responding_probes
        if self.trace is not None and other.trace is not None:
            self.trace.extend(other.trace)


@dataclass(frozen=True)
class ProbeParams:
    """Replay knobs.

    ``forward_stop`` selects what a stop-set hit does during the forward phase
    of the searching strategy: ``False`` (default) lets the forward phase run
    on to the last responder, ``True`` ends probing for the destination at once.
    The backward phase always stops on a hit.
    ``warmup_count=None`` means ``min(1000, ceil(0.02 * |D|))``.
    """

    probes_per_hop: int = 1
    gap_limit: int = 3
    warmup_count: Optional[int] = None
    forward_stop: bool = False
    record_probes: bool = False

    def __post_init__(self):
        if self.probes_per_hop < 1:
            raise ValueError("probes_per_hop must be >= 1")
        if self.gap_limit < 1:
            raise ValueError("gap_limit must be >= 1")
        if self.warmup_count is not None and self.warmup_count < 1:
            raise ValueError("warmup_count must be >= 1")

    def warmup_for(self, n_destinations: int) -> int:
        if self.warmup_count is not None:
            return self.warmup_count
        return max(1, min(1000, math.ceil(0.02 * n_destinations)))


@dataclass(frozen=True)
class StrategyResult:
    strategy_name: str
    discovered_interfaces: frozenset
    discovered_links: frozenset
    visit_log: VisitLog
    per_destination: Mapping[Addr, StopReason]
    # destination -> {ttl: addr} replies seen while probing it
    observed: Mapping[Addr, tuple] = field(default_factory=dict)
    h: Optional[int] = None

    @property
    def probes_sent(self) -> int:
        return self.visit_log.probes_sent

    @property
    def responding_probes(self) -> int:
        return self.visit_log.responding_probes


def probe(ts: TraceSet, dest: Addr, ttl: int, log: VisitLog, probes_per_hop: int = 1) -> Optional[Addr]:
    """Send ``probes_per_hop`` probes at ``ttl`` toward ``dest`` and account for them."""
    path = ts.paths.get(dest)
    if path is None:
        raise KeyError(f"unknown destination {dest}")
    if ttl < 1:
        raise ValueError(f"TTL must be >= 1, got {ttl}")
    log.probes_sent += probes_per_hop
    if log.trace is not None:
        log.trace.append((dest, ttl))
    hops = path.effective_hops
    addr = hops[ttl - 1] if ttl <= len(hops) else None
    if addr is not None:
        log.visits[(addr, ttl)] += probes_per_hop
        log.responding_probes += probes_per_hop
    return addr


class _Run:
    """Mutable state of one strategy run: visit log, stop set, per-destination outcomes."""

    def __init__(self, ts: TraceSet, params: ProbeParams):
        self.ts = ts
        self.params = params
        self.log = VisitLog(trace=[] if params.record_probes else None)
        self.stop_set: set[Addr] = set()
        self.outcomes: dict[Addr, StopReason] = {}
        self.observed: dict[Addr, dict[int, Addr]] = {}
        self._seen: dict[int, Addr] = {}

    def _probe(self, dest: Addr, ttl: int) -> Optional[Addr]:
        # same accounting as probe(), minus the argument checks; this is the hot loop
        log = self.log
        n = self.params.probes_per_hop
        log.probes_sent += n
        if log.trace is not None:
            log.trace.append((dest, ttl))
        hops = self.ts.paths[dest].effective_hops
        addr = hops[ttl - 1] if ttl <= len(hops) else None
        if addr is not None:
            visits = log.visits
            key = (addr, ttl)
            visits[key] = visits.get(key, 0) + n
            log.responding_probes += n
            self._seen[ttl] = addr
        return addr

    def _begin(self, dest: Addr) -> None:
        self._seen = self.observed[dest] = {}

    def _done(self, dest: Addr, reason: StopReason) -> None:
        self.outcomes[dest] = reason

    def forward(self, dest: Addr) -> None:
        """Probe every TTL of the recorded path; accounting inlined from ``_probe``."""
        self._begin(dest)
        hops = self.ts.paths[dest].effective_hops
        n = self.params.probes_per_hop
        log, seen, visits, add = self.log, self._seen, self.log.visits, self.stop_set.add
        log.probes_sent += n * len(hops)
        if log.trace is not None:
            log.trace.extend((dest, ttl) for ttl in range(1, len(hops) + 1))
        for ttl, addr in enumerate(hops, start=1):
            if addr is not None:
                key = (addr, ttl)
                visits[key] = visits.get(key, 0) + n
                log.responding_probes += n
                seen[ttl] = addr
                add(addr)
        self._done(dest, COMPLETED)

    def backward(self, dest: Addr, start: int, begin: bool = True) -> None:
        if begin:
            self._begin(dest)
        for ttl in range(start, 0, -1):
            addr = self._probe(dest, ttl)
            if addr is None:
                continue
            if addr in self.stop_set:
                return self._done(dest, StopReason(StopKind.STOP_SET_HIT, addr))
            self.stop_set.add(addr)
        self._done(dest, REACHED_TTL1)

    def search(self, dest: Addr, h: int) -> None:
        self._begin(dest)
        ttl = h
        while True:
            first = self._probe(dest, ttl)
            if first is not None:
                break
            if ttl == 1:
                return self._done(dest, NO_RESPONDER)
            ttl = max(1, ttl // 2)
        start = ttl

        # forward phase, starting with the first reply found
        gap = 0
        addr = first
        while True:
            if addr is None:
                gap += 1
                if gap >= self.params.gap_limit:
                    break
            else:
                gap = 0
                if addr in self.stop_set and self.params.forward_stop:
                    return self._done(dest, StopReason(StopKind.STOP_SET_HIT, addr))
                self.stop_set.add(addr)
            ttl += 1
            addr = self._probe(dest, ttl)

        if start > 1:
            self.backward(dest, start - 1, begin=False)
        else:
            self._done(dest, REACHED_TTL1)

    def warm_up(self, count: int) -> int:
        """Forward-trace the first ``count`` destinations and derive the start hop."""
        warm = self.ts.destinations[:count]
        for dest in warm:
            self.forward(dest)
        return _start_hop([self.ts.paths[d] for d in warm])

    def result(self, name: str, h: Optional[int] = None) -> StrategyResult:
        observed = {d: seen for d, seen in self.observed.items() if seen}
        links = set()
        for seen in observed.values():
            links.update((a, seen[t + 1]) for t, a in seen.items() if t + 1 in seen)
        return StrategyResult(
            strategy_name=name,
            discovered_interfaces=frozenset(self.log.interfaces()),
            discovered_links=frozenset(links),
            visit_log=self.log,
            per_destination=dict(self.outcomes),
            observed=observed,
            h=h,
        )


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def _start_hop(paths) -> int:
    incomplete = [last_responding_hop(p) for p in paths if not p.dest_responded]
    incomplete = [t for t in incomplete if t is not None]
    sample = incomplete or [len(p) for p in paths]
    if not sample:
        return 1
    return max(1, _round_half_up(Fraction(sum(sample), len(sample))))


def run_standard(ts: TraceSet, p: ProbeParams = ProbeParams()) -> StrategyResult:
    run = _Run(ts, p)
    for dest in ts.destinations:
        run.forward(dest)
    return run.result(STANDARD)


def run_pure_backwards(ts: TraceSet, p: ProbeParams = ProbeParams()) -> StrategyResult:
    """Backward probing from the last responding hop, known in advance."""
    run = _Run(ts, p)
    for path in ts:
        last = last_responding_hop(path)
        if last is None:
            run._done(path.destination, NO_RESPONDER)
        else:
            run.backward(path.destination, last)
    return run.result(PURE_BACKWARDS)


def run_ordinary_backwards(ts: TraceSet, p: ProbeParams = ProbeParams()) -> StrategyResult:
    run = _Run(ts, p)
    for path in ts:
        if path.dest_responded:
            run.backward(path.destination, path.dest_hop)
        else:
            run._done(path.destination, DESTINATION_SKIPPED)
    return run.result(ORDINARY_BACKWARDS)


def tune_h(ts: TraceSet, warmup_count: int, p: ProbeParams = ProbeParams(), log: Optional[VisitLog] = None) -> int:
    """Start hop from a forward warm-up over the first ``warmup_count`` destinations.

    Mean last responding hop of the warm-up traces whose destination stayed
    silent, rounded half up; mean path length if every destination replied.
    Warm-up probes are added to ``log`` when one is given.
    """
    if warmup_count < 1:
        raise ValueError("warmup_count must be >= 1")
    run = _Run(ts, p)
    h = run.warm_up(warmup_count)
    if log is not None:
        log.merge(run.log)
    return h


def run_searching(ts: TraceSet, h: int, p: ProbeParams = ProbeParams()) -> StrategyResult:
    if h < 1:
        raise ValueError("h must be >= 1")
    run = _Run(ts, p)
    for dest in ts.destinations:
        run.search(dest, h)
    return run.result(SEARCHING, h)


def run_searching_ordinary_backwards(
    ts: TraceSet, p: ProbeParams = ProbeParams(), h: Optional[int] = None
) -> StrategyResult:
    """Ordinary backwards for replying destinations, searching for silent ones.

    Unless ``h`` is given, the start hop comes from a forward warm-up whose
    probes and discoveries are part of the result.
    """
    run = _Run(ts, p)
    rest = ts.destinations
    if h is None:
        count = p.warmup_for(len(ts))
        h = run.warm_up(count)
        rest = rest[count:]
    elif h < 1:
        raise ValueError("h must be >= 1")
    for dest in rest:
        path = ts.paths[dest]
        if path.dest_responded:
            run.backward(dest, path.dest_hop)
        else:
            run.search(dest, h)
    return run.result(SEARCHING_ORDINARY_BACKWARDS, h)
