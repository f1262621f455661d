import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def circuits_dir():
    return ROOT / "circuits"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LOG = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion outcome; the test still asserts it."""
    log = request.config.stash.setdefault(ACCEPTANCE_LOG, [])

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        log.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE_LOG, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(log):
            terminalreporter.write_line(line)
