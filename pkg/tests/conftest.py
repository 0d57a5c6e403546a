import sys
from pathlib import Path

import pytest

from backtrace.dataset import TraceSet
from backtrace.model import RecordedPath, addr_from_text

sys.path.insert(0, str(Path(__file__).parent))

A, B, C, D1, E, D2, F, G, D3, H = (addr_from_text(f"1.0.0.{i}") for i in range(1, 11))
X, Y = addr_from_text("2.0.0.1"), addr_from_text("2.0.0.2")
R = [addr_from_text(f"3.0.0.{i}") for i in range(1, 6)]


def path(dest, hops, responded=None):
    if responded is None:
        responded = bool(hops) and hops[-1] == dest
    return RecordedPath(dest, tuple(hops), responded)


def traceset(*paths, monitor="test"):
    return TraceSet.from_paths(monitor, paths)


@pytest.fixture
def two_paths():
    """[A,B,C,D1] and [A,B,E,D2], both destinations replying."""
    return traceset(path(D1, [A, B, C, D1]), path(D2, [A, B, E, D2]))


@pytest.fixture
def fig6():
    """R1..R5 all reply, destination silent."""
    return traceset(path(X, R, responded=False))


# criterion lines recorded by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
