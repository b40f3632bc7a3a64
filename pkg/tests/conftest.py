import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Register the calling test as acceptance criterion ``n``; the outcome is
    printed as a PASS/FAIL line at the end of the session."""

    def register(n: int, title: str):
        _ACCEPTANCE[request.node.nodeid] = (n, title)
    return register


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.nodeid in _ACCEPTANCE:
        n, title = _ACCEPTANCE[item.nodeid]
        line = f"criterion {n:>2} {'PASS' if rep.passed else 'FAIL'}: {title}"
        item.config.stash.setdefault(_LINES, []).append((n, line))


_LINES = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
