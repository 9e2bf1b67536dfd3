import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
GOLDEN = Path(__file__).parent / "golden"

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    def _report(criterion: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" -- {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def two_state_phmc(n, t, tau, seed):
    """Trajectories from the strongly contrasting two-regime chain."""
    from randtheil import SegmentedChain, simulate_phmc

    p1 = [[0.95, 0.05], [0.05, 0.95]]
    p2 = [[0.05, 0.95], [0.95, 0.05]]
    r = np.random.default_rng(seed)
    return simulate_phmc(SegmentedChain((tau,), (p1, p2)), r.integers(0, 2, n), t - 1, r)
