import pytest

from ordexp.model import SufficientStats

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def case_stats():
    """Air-conditioning failure data reduced to (X1, X2, S1, S2)."""
    return SufficientStats(5.0, 15.0, 609.0, 403.0, 6, 6)


@pytest.fixture
def record_acceptance():
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
