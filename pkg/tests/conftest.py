import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one ``PASS|FAIL criterion observed`` line; returns the pass flag."""

    def record(name: str, passed: bool, observed: str) -> bool:
        _LINES.append(f"{'PASS' if passed else 'FAIL'} {name}: {observed}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
