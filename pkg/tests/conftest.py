import pytest

ACCEPTANCE = pytest.StashKey[dict]()
CRITERIA = range(1, 9)


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion; returns the verdict."""
    lines = request.config.stash[ACCEPTANCE]

    def record(criterion: int, ok: bool, detail: str) -> bool:
        lines[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[ACCEPTANCE]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for c in CRITERIA:
        terminalreporter.write_line(lines.get(c, f"criterion {c}: FAIL  did not run to completion"))
