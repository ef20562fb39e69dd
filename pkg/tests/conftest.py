import time

import pytest

_LINES = pytest.StashKey[list]()
_START = pytest.StashKey[float]()
SUITE_BUDGET_S = 300.0


def pytest_configure(config):
    config.stash[_LINES] = []
    config.stash[_START] = time.perf_counter()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[_LINES]

    def report(tag: str, ok: bool, detail: str) -> bool:
        line = f"criterion {tag}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    elapsed = time.perf_counter() - config.stash[_START]
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    ok = elapsed < SUITE_BUDGET_S
    terminalreporter.write_line(
        f"criterion 8 (runtime): {'PASS' if ok else 'FAIL'}  full session {elapsed:.1f} s "
        f"(< {SUITE_BUDGET_S:.0f} s)")
