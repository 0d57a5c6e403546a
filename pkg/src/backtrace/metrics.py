"""Redundancy distributions, quantiles, missed-discovery reports and comparisons."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .dataset import TraceSet
from .model import adjacent_links, last_responding_hop
from .probing import StrategyResult

SUMMARY_POINTS = (
    ("min", 0.0),
    ("p5", 0.05),
    ("p10", 0.10),
    ("q1", 0.25),
    ("median", 0.5),
    ("q3", 0.75),
    ("p90", 0.90),
    ("p95", 0.95),
    ("max", 1.0),
)

# key used by incomplete_path_distribution for paths with no valid reply at all
NO_RESPONDER_BUCKET = 0


def _exact(q) -> Fraction:
    # floats are taken at their shortest decimal repr, so 0.05 means 1/20
    return Fraction(repr(q)) if isinstance(q, float) else Fraction(q)


def quantile(sorted_values: Sequence, q) -> int:
    """Element at 1-based position ``(n - 1) * q + 1``, rounded to nearest.

    A position exactly halfway between two integers takes the lower one.
    """
    if not sorted_values:
        raise ValueError("quantile of empty sample")
    q = _exact(q)
    if not 0 <= q <= 1:
        raise ValueError(f"quantile fraction outside [0, 1]: {q}")
    pos = (len(sorted_values) - 1) * q + 1
    whole, frac = divmod(pos, 1)
    index = int(whole) + (1 if frac > Fraction(1, 2) else 0)
    return sorted_values[index - 1]


@dataclass(frozen=True)
class QuantileSummary:
    count: int
    min: int
    p5: int
    p10: int
    q1: int
    median: int
    q3: int
    p90: int
    p95: int
    max: int

    @classmethod
    def of(cls, values) -> "QuantileSummary":
        ordered = sorted(values)
        return cls(len(ordered), *(quantile(ordered, q) for _, q in SUMMARY_POINTS))

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name, _ in SUMMARY_POINTS)


@dataclass(frozen=True)
class DistanceBin:
    interface_count: int
    visits: tuple[int, ...]
    summary: QuantileSummary


@dataclass(frozen=True)
class RedundancyDistribution:
    per_distance: Mapping[int, DistanceBin]

    def total_visits(self) -> int:
        return sum(sum(b.visits) for b in self.per_distance.values())


def redundancy_distribution(r: StrategyResult) -> RedundancyDistribution:
    by_ttl: dict[int, list[int]] = defaultdict(list)
    for (_, ttl), count in r.visit_log.visits.items():
        by_ttl[ttl].append(count)
    bins = {}
    for ttl in sorted(by_ttl):
        visits = tuple(sorted(by_ttl[ttl]))
        bins[ttl] = DistanceBin(len(visits), visits, QuantileSummary.of(visits))
    return RedundancyDistribution(bins)


@dataclass(frozen=True)
class MissedReport:
    total_interfaces: int
    discovered_interfaces: int
    total_links: int
    discovered_links: int

    @property
    def pct_interfaces_missed(self) -> float:
        return pct_missed(self.total_interfaces, self.discovered_interfaces)

    @property
    def pct_links_missed(self) -> float:
        return pct_missed(self.total_links, self.discovered_links)


def pct_missed(total: int, discovered: int) -> float:
    if total <= 0:
        raise ValueError("missed percentage needs a non-empty reference")
    return 100.0 * (total - discovered) / total


def missed_report(r: StrategyResult, reference: StrategyResult) -> MissedReport:
    ref_ifaces = reference.discovered_interfaces
    ref_links = reference.discovered_links
    return MissedReport(
        total_interfaces=len(ref_ifaces),
        discovered_interfaces=len(r.discovered_interfaces & ref_ifaces),
        total_links=len(ref_links),
        discovered_links=len(r.discovered_links & ref_links),
    )


@dataclass(frozen=True)
class ComparisonRow:
    strategy_name: str
    mean_visits: Optional[float]  # None when nothing was discovered
    prop_missed: float


def comparison_table(results: Sequence[StrategyResult], reference: StrategyResult) -> list[ComparisonRow]:
    ref = reference.discovered_interfaces
    rows = []
    for r in results:
        found = r.discovered_interfaces
        mean = r.responding_probes / len(found) if found else None
        missed = 1.0 - len(found & ref) / len(ref) if ref else 0.0
        rows.append(ComparisonRow(r.strategy_name, mean, missed))
    return rows


def incomplete_path_distribution(ts: TraceSet) -> dict[int, int]:
    """Histogram of last responding hops over paths whose destination stayed silent.

    Paths without any valid reply land in ``NO_RESPONDER_BUCKET``.
    """
    hist: Counter = Counter()
    for path in ts:
        if not path.dest_responded:
            last = last_responding_hop(path)
            hist[NO_RESPONDER_BUCKET if last is None else last] += 1
    return dict(sorted(hist.items()))


def extract_links(r: StrategyResult) -> set:
    links = set()
    for seen in r.observed.values():
        links |= adjacent_links(seen)
    return links
