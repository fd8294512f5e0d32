import pytest

_LINES: list = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the terminal summary prints them all together."""

    def record(number: int, title: str, passed: bool, detail: str, seconds: float) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {title}: {detail} ({seconds:.1f}s)"
        _LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
