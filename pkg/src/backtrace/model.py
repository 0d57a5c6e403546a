"""Addresses, hop responses and recorded paths.

Addresses are plain ``int`` values (32-bit, host order).  A hop is either an
address or ``None`` for a silent hop.  Responses from special-use blocks are
folded into silence by :func:`effective_response`.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

Addr = int
Hop = Optional[Addr]

# (network, prefix length) pairs; order is lookup order only.
SPECIAL_USE_BLOCKS: tuple[tuple[str, int], ...] = (
    ("0.0.0.0", 8),
    ("10.0.0.0", 8),
    ("127.0.0.0", 8),
    ("172.16.0.0", 12),
    ("192.88.99.0", 24),
    ("192.168.0.0", 16),
    ("198.18.0.0", 15),
    ("224.0.0.0", 4),
    ("240.0.0.0", 4),
)


def addr_from_text(text: str) -> Addr:
    return int(ipaddress.IPv4Address(text))


def addr_to_text(addr: Addr) -> str:
    return str(ipaddress.IPv4Address(addr))


def _block_range(net: str, plen: int) -> tuple[int, int]:
    lo = addr_from_text(net)
    return lo, lo + (1 << (32 - plen)) - 1


_BLOCK_RANGES = tuple((f"{net}/{plen}", *_block_range(net, plen)) for net, plen in SPECIAL_USE_BLOCKS)
# first octets that can fall inside some block
_SUSPECT_OCTETS = frozenset(o for _, lo, hi in _BLOCK_RANGES for o in range(lo >> 24, (hi >> 24) + 1))


@dataclass(frozen=True)
class AddressClass:
    """Classification of one address; ``block`` is set only for special-use."""

    valid: bool
    block: Optional[str] = None

    def __str__(self):
        return "Valid" if self.valid else f"SpecialUse({self.block})"


VALID = AddressClass(True)


def classify_address(addr: Addr) -> AddressClass:
    if not 0 <= addr <= 0xFFFFFFFF:
        raise ValueError(f"not a 32-bit address: {addr!r}")
    if addr >> 24 not in _SUSPECT_OCTETS:
        return VALID
    for name, lo, hi in _BLOCK_RANGES:
        if lo <= addr <= hi:
            return AddressClass(False, name)
    return VALID


def is_valid(addr: Addr) -> bool:
    return classify_address(addr).valid


def effective_response(hop: Hop) -> Optional[Addr]:
    """The address a hop contributes to visit accounting, if any."""
    if hop is None or not is_valid(hop):
        return None
    return hop


@dataclass(frozen=True)
class RecordedPath:
    """Ground-truth route to one destination.

    ``hops[i]`` is the reply at TTL ``i + 1``.  When ``dest_responded`` the last
    hop is the destination itself.
    """

    destination: Addr
    hops: tuple[Hop, ...]
    dest_responded: bool

    def __post_init__(self):
        if not isinstance(self.hops, tuple):
            object.__setattr__(self, "hops", tuple(self.hops))
        if not self.hops:
            raise ValueError("recorded path has no hops")
        if self.dest_responded:
            if self.hops[-1] != self.destination:
                raise ValueError("responding destination lacks final reply")
            if self.destination in self.hops[:-1]:
                raise ValueError("destination address appears before its own hop")
        elif self.destination in self.hops:
            raise ValueError("non-responding destination appears among hops")

    def __len__(self):
        return len(self.hops)

    @property
    def dest_hop(self) -> Optional[int]:
        return len(self.hops) if self.dest_responded else None

    def hop(self, ttl: int) -> Hop:
        """Raw hop at ``ttl`` (1-based); ``None`` beyond the record."""
        if ttl < 1:
            raise ValueError(f"TTL must be >= 1, got {ttl}")
        if ttl > len(self.hops):
            return None
        return self.hops[ttl - 1]

    @cached_property
    def effective_hops(self) -> tuple[Optional[Addr], ...]:
        suspect = _SUSPECT_OCTETS
        return tuple(
            h if h is not None and (h >> 24 not in suspect or is_valid(h)) else None
            for h in self.hops
        )


def last_responding_hop(path: RecordedPath) -> Optional[int]:
    for ttl in range(len(path.effective_hops), 0, -1):
        if path.effective_hops[ttl - 1] is not None:
            return ttl
    return None


def adjacent_links(observed) -> set[tuple[Addr, Addr]]:
    """Links between replies seen at consecutive TTLs.

    ``observed`` maps ``ttl -> addr`` for one destination, or holds ``(ttl, addr)``
    pairs in any order.
    """
    by_ttl = dict(observed)
    return {(a, by_ttl[t + 1]) for t, a in by_ttl.items() if t + 1 in by_ttl}
