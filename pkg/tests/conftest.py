import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Record a PASS/FAIL line for the acceptance summary."""

    def record(number, name, ok, detail, elapsed, limit):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {name}: {detail} [{elapsed:.2f}s / {limit:g}s]"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
