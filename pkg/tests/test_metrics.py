import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from backtrace.dataset import SynthParams, TraceSet, generate_synthetic
from backtrace.metrics import (
    NO_RESPONDER_BUCKET,
    SUMMARY_POINTS,
    MissedReport,
    QuantileSummary,
    comparison_table,
    extract_links,
    incomplete_path_distribution,
    missed_report,
    pct_missed,
    quantile,
    redundancy_distribution,
)
from backtrace.probing import (
    ProbeParams,
    StrategyResult,
    VisitLog,
    run_ordinary_backwards,
    run_pure_backwards,
    run_searching_ordinary_backwards,
    run_standard,
)
from oracles import positional_quantile

from conftest import A, B, C, D1, D2, E, X, Y, path, traceset

QS = [q for _, q in SUMMARY_POINTS]


def test_quantile_examples():
    assert quantile(list(range(1, 11)), 0.5) == 5
    assert quantile([7], 0.9) == 7
    assert quantile([1, 2, 3, 4], 0) == 1
    assert quantile([1, 2, 3, 4], 1) == 4
    # (4-1)*0.5+1 = 2.5 -> lower
    assert quantile([10, 20, 30, 40], 0.5) == 20
    # (5-1)*0.9+1 = 4.6 -> 5
    assert quantile([1, 2, 3, 4, 5], 0.9) == 5


def test_quantile_halfway_goes_low():
    vals = list(range(100, 111))
    # (11-1)*0.05+1 = 1.5 and (11-1)*0.95+1 = 10.5
    assert quantile(vals, 0.05) == 100
    assert quantile(vals, 0.95) == 109
    assert quantile(vals, Fraction(1, 20)) == 100


def test_quantile_errors():
    with pytest.raises(ValueError):
        quantile([], 0.5)
    with pytest.raises(ValueError):
        quantile([1], 1.5)


def test_quantile_matches_oracle():
    rng = random.Random(2024)
    for _ in range(1000):
        values = sorted(rng.randint(0, 1000) for _ in range(rng.randint(1, 200)))
        for q in QS:
            assert quantile(values, q) == positional_quantile(values, q)


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=300))
def test_summary_ordered_and_members(values):
    s = QuantileSummary.of(values)
    seq = s.as_tuple()
    assert list(seq) == sorted(seq)
    assert set(seq) <= set(values)
    assert s.count == len(values)
    assert s.min == min(values) and s.max == max(values)


def test_redundancy_distribution_two_paths(two_paths):
    dist = redundancy_distribution(run_standard(two_paths))
    assert dist.per_distance[1].visits == (2,)
    assert dist.per_distance[3].interface_count == 2
    assert dist.per_distance[3].visits == (1, 1)
    assert dist.total_visits() == 8


def test_redundancy_single_probe():
    ts = traceset(path(D1, [A, B, C, D1]))
    for b in redundancy_distribution(run_standard(ts)).per_distance.values():
        assert b.summary.min == b.summary.max


def test_interface_at_two_distances():
    # the same tail interface C reached at TTL 4 on one path and TTL 5 on the other
    ts = traceset(path(D1, [A, B, E, C, D1]), path(D2, [A, B, C, D2]))
    dist = redundancy_distribution(run_standard(ts))
    assert 1 in dist.per_distance[4].visits
    assert dist.per_distance[3].interface_count == 2


def test_distribution_invariants_random():
    ts = generate_synthetic(SynthParams(n_destinations=800, seed=3))
    std = run_standard(ts)
    for r in (std, run_pure_backwards(ts), run_searching_ordinary_backwards(ts)):
        dist = redundancy_distribution(r)
        assert dist.total_visits() == r.responding_probes
        for b in dist.per_distance.values():
            assert b.interface_count == len(b.visits) == b.summary.count
    dist = redundancy_distribution(std)
    for ttl, b in dist.per_distance.items():
        at_ttl = {p.effective_hops[ttl - 1] for p in ts if ttl <= len(p)} - {None}
        assert b.interface_count == len(at_ttl)


def _result(ifaces, links=(), responding=None):
    log = VisitLog()
    for i, a in enumerate(sorted(ifaces)):
        log.visits[(a, 1)] += 1
    log.responding_probes = log.probes_sent = len(ifaces) if responding is None else responding
    return StrategyResult("r", frozenset(ifaces), frozenset(links), log, {})


def test_missed_report_arithmetic():
    ref = _result({A, B, C, E}, {(A, B), (B, C), (B, E)})
    r = _result({A, B, C}, {(A, B), (B, C)})
    rep = missed_report(r, ref)
    assert rep.total_interfaces == 4 and rep.discovered_interfaces == 3
    assert round(rep.pct_interfaces_missed, 2) == 25.00
    assert round(rep.pct_links_missed, 2) == 33.33
    same = missed_report(ref, ref)
    assert same.pct_interfaces_missed == 0 and same.pct_links_missed == 0


def test_missed_report_large_counts():
    rep = MissedReport(92_381, 88_204, 101_850, 92_602)
    assert f"{rep.pct_interfaces_missed:.2f}" == "4.52"
    assert f"{rep.pct_links_missed:.2f}" == "9.08"
    with pytest.raises(ValueError):
        pct_missed(0, 0)


def test_missed_ignores_interfaces_outside_reference(two_paths):
    ref = _result({A, B})
    r = _result({A, X, Y})
    assert missed_report(r, ref).discovered_interfaces == 1


def test_comparison_table(two_paths):
    std = run_standard(two_paths)
    pure = run_pure_backwards(two_paths)
    rows = comparison_table([std, pure], std)
    assert rows[0].prop_missed == 0
    assert rows[0].mean_visits == pytest.approx(8 / 6)
    assert rows[1].mean_visits == pytest.approx(7 / 6)
    half = _result({A, B, C}, responding=8)
    row = comparison_table([half], std)[0]
    assert row.prop_missed == pytest.approx(0.5)


def test_comparison_empty_discovery(two_paths):
    ts = traceset(path(X, [None], responded=False))
    row = comparison_table([run_ordinary_backwards(ts)], run_standard(two_paths))[0]
    assert row.mean_visits is None and row.prop_missed == 1.0


def test_incomplete_distribution():
    assert incomplete_path_distribution(traceset(path(D1, [A, D1]))) == {}
    ts = traceset(
        path(X, [A, B, C, E, D2], responded=False),
        path(Y, [A, B, C, D1, E], responded=False),
        path(D2 + 100, [A, B, C, None, None, None, E], responded=False),
        path(D2 + 101, [None], responded=False),
    )
    assert incomplete_path_distribution(ts) == {NO_RESPONDER_BUCKET: 1, 5: 2, 7: 1}


def test_incomplete_mass_tracks_nonresponse_rate():
    n = 2000
    ts = generate_synthetic(SynthParams(n_destinations=n, seed=8, dest_nonresponse_rate=0.4))
    mass = sum(incomplete_path_distribution(ts).values())
    assert abs(mass - 0.4 * n) <= 0.05 * n


def test_extract_links(two_paths):
    one = traceset(path(D1, [A, B, D1]))
    assert extract_links(run_standard(one)) == {(A, B), (B, D1)}
    gap = traceset(path(X, [A, None, C], responded=False))
    assert extract_links(run_standard(gap)) == set()
    assert extract_links(run_standard(two_paths)) == {(A, B), (B, C), (C, D1), (B, E), (E, D2)}


def test_extract_links_agrees_with_result():
    ts = generate_synthetic(SynthParams(n_destinations=500, seed=12))
    for r in (run_standard(ts), run_searching_ordinary_backwards(ts, ProbeParams(gap_limit=2))):
        assert extract_links(r) == r.discovered_links


def test_adding_destination_never_shrinks_standard():
    ts = generate_synthetic(SynthParams(n_destinations=200, seed=21))
    prev = 0
    for k in range(0, 201, 20):
        sub = TraceSet.from_paths("m", list(ts)[:k])
        count = len(run_standard(sub).discovered_interfaces)
        assert count >= prev
        prev = count
