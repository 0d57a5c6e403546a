"""Trace set container, the ``TRACESET v1`` text format and synthetic generation."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from .model import Addr, RecordedPath, addr_from_text, addr_to_text, is_valid

HEADER_PREFIX = "TRACESET v1 monitor="
MAX_DEPTH = 64


class TraceFormatError(ValueError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


@dataclass(frozen=True)
class TraceSet:
    monitor_id: str
    destinations: tuple[Addr, ...]
    paths: Mapping[Addr, RecordedPath]

    def __post_init__(self):
        object.__setattr__(self, "destinations", tuple(self.destinations))
        if len(set(self.destinations)) != len(self.destinations):
            raise ValueError("duplicate destination")
        if set(self.destinations) != set(self.paths):
            raise ValueError("destination list and path mapping disagree")
        for dest in self.destinations:
            if self.paths[dest].destination != dest:
                raise ValueError(f"path keyed by {addr_to_text(dest)} has another destination")

    @classmethod
    def from_paths(cls, monitor_id: str, paths: Iterable[RecordedPath]) -> "TraceSet":
        paths = list(paths)
        dests = [p.destination for p in paths]
        if len(set(dests)) != len(dests):
            raise ValueError("duplicate destination")
        return cls(monitor_id, tuple(dests), {p.destination: p for p in paths})

    def __len__(self):
        return len(self.destinations)

    def __iter__(self):
        return (self.paths[d] for d in self.destinations)

    def reordered(self, order: Iterable[Addr]) -> "TraceSet":
        return TraceSet(self.monitor_id, tuple(order), self.paths)

    def shuffled(self, seed: int) -> "TraceSet":
        order = list(self.destinations)
        random.Random(seed).shuffle(order)
        return self.reordered(order)

    def subset(self, keep) -> "TraceSet":
        """Trace set restricted to the destinations whose path satisfies ``keep``."""
        return TraceSet.from_paths(self.monitor_id, (p for p in self if keep(p)))


# --- text format -----------------------------------------------------------

def _parse_addr(token: str, lineno: int) -> Addr:
    parts = token.split(".")
    if len(parts) != 4 or not all(p.isdigit() and len(p) <= 3 for p in parts):
        raise TraceFormatError(lineno, f"bad address {token!r}")
    try:
        return addr_from_text(token)
    except ValueError:
        raise TraceFormatError(lineno, f"bad address {token!r}") from None


def parse_trace_file(data: Union[bytes, str]) -> TraceSet:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    lineno = 0
    monitor = None
    paths: list[RecordedPath] = []
    seen: set[Addr] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r").rstrip()
        if not line or line.startswith("#"):
            continue
        if monitor is None:
            if not line.startswith(HEADER_PREFIX):
                raise TraceFormatError(lineno, "missing 'TRACESET v1 monitor=' header")
            monitor = line[len(HEADER_PREFIX):]
            if not monitor or " " in monitor:
                raise TraceFormatError(lineno, "bad monitor label")
            continue
        fields = line.split(" ")
        if fields[0] != "D":
            raise TraceFormatError(lineno, f"unknown record type {fields[0]!r}")
        if len(fields) < 5:
            raise TraceFormatError(lineno, "truncated D record")
        dest = _parse_addr(fields[1], lineno)
        flag = fields[2]
        if flag not in ("R", "N"):
            raise TraceFormatError(lineno, f"flag must be R or N, got {flag!r}")
        if not fields[3].isdigit():
            raise TraceFormatError(lineno, f"bad hop count {fields[3]!r}")
        count = int(fields[3])
        hop_tokens = fields[4:]
        if count < 1 or count != len(hop_tokens):
            raise TraceFormatError(lineno, f"hop count {count} but {len(hop_tokens)} hops given")
        hops = tuple(None if tok == "*" else _parse_addr(tok, lineno) for tok in hop_tokens)
        if dest in seen:
            raise TraceFormatError(lineno, f"duplicate destination {fields[1]}")
        try:
            path = RecordedPath(dest, hops, flag == "R")
        except ValueError as exc:
            raise TraceFormatError(lineno, str(exc)) from None
        seen.add(dest)
        paths.append(path)
    if monitor is None:
        raise TraceFormatError(max(lineno, 1), "missing 'TRACESET v1 monitor=' header")
    return TraceSet.from_paths(monitor, paths)


def format_path(path: RecordedPath) -> str:
    hops = " ".join("*" if h is None else addr_to_text(h) for h in path.hops)
    flag = "R" if path.dest_responded else "N"
    return f"D {addr_to_text(path.destination)} {flag} {len(path.hops)} {hops}"


def write_trace_file(ts: TraceSet) -> bytes:
    lines = [HEADER_PREFIX + ts.monitor_id]
    lines.extend(format_path(p) for p in ts)
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_trace_file(path) -> TraceSet:
    with open(path, "rb") as fh:
        return parse_trace_file(fh.read())


def save_trace_file(ts: TraceSet, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_trace_file(ts))


# --- synthetic ground truth ------------------------------------------------

@dataclass(frozen=True)
class SynthParams:
    """Knobs of the synthetic route tree.

    ``gateways`` fixes how many distinct first-hop interfaces the monitor has;
    every deeper router draws ``1 + Poisson(branching_factor - 1)`` child
    slots, so the expected fan-out is ``branching_factor``.
    """

    n_destinations: int = 5000
    mean_depth: float = 17.0
    depth_spread: float = 4.0
    branching_factor: float = 1.7
    dest_nonresponse_rate: float = 0.4
    hop_nonresponse_rate: float = 0.05
    seed: int = 0
    gateways: int = 1
    monitor_id: str = "synth"

    def __post_init__(self):
        if self.n_destinations < 1:
            raise ValueError("n_destinations must be >= 1")
        if self.mean_depth < 2:
            raise ValueError("mean_depth must be >= 2")
        if self.depth_spread < 0:
            raise ValueError("depth_spread must be >= 0")
        if self.branching_factor < 1:
            raise ValueError("branching_factor must be >= 1")
        if self.gateways < 1:
            raise ValueError("gateways must be >= 1")
        for name in ("dest_nonresponse_rate", "hop_nonresponse_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")


class _Node:
    __slots__ = ("addr", "slots")

    def __init__(self, addr: Addr, n_slots: int):
        self.addr = addr
        self.slots: list[Optional[_Node]] = [None] * n_slots


def _poisson(rng: random.Random, lam: float) -> int:
    # Knuth; lam stays small here
    if lam <= 0:
        return 0
    limit, k, prod = math.exp(-lam), 0, rng.random()
    while prod > limit:
        k += 1
        prod *= rng.random()
    return k


class _AddressPool:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[Addr] = set()

    def fresh(self) -> Addr:
        while True:
            addr = self.rng.getrandbits(32)
            if addr not in self.used and is_valid(addr):
                self.used.add(addr)
                return addr


def generate_synthetic(p: SynthParams) -> TraceSet:
    """Random route tree rooted at the monitor, one leaf per destination.

    Each destination's route is a random walk down a lazily grown tree; the
    destination hangs off the router reached at depth ``length - 1``.
    Non-response is drawn once per (path, hop) and is part of the ground truth.
    """
    rng = random.Random(p.seed)
    pool = _AddressPool(rng)
    root = _Node(0, p.gateways)
    extra = p.branching_factor - 1.0

    rand = rng.random
    paths = []
    for _ in range(p.n_destinations):
        length = round(rng.gauss(p.mean_depth, p.depth_spread)) if p.depth_spread else round(p.mean_depth)
        length = min(max(length, 2), MAX_DEPTH)
        node = root
        routers = []
        for _ in range(length - 1):
            slots = node.slots
            i = int(rand() * len(slots))
            nxt = slots[i]
            if nxt is None:
                nxt = slots[i] = _Node(pool.fresh(), 1 + _poisson(rng, extra))
            node = nxt
            routers.append(node.addr)
        dest = pool.fresh()
        responds = rng.random() >= p.dest_nonresponse_rate
        if p.hop_nonresponse_rate > 0:
            hops: list[Optional[Addr]] = [
                None if rng.random() < p.hop_nonresponse_rate else a for a in routers
            ]
        else:
            hops = list(routers)
        if responds:
            hops.append(dest)
        else:
            while hops and hops[-1] is None:
                hops.pop()
            if not hops:
                hops = [None]
        paths.append(RecordedPath(dest, tuple(hops), responds))
    return TraceSet.from_paths(p.monitor_id, paths)
