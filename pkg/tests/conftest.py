import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; the lines are printed in the terminal summary."""

    def add(name, passed, detail, fatal=True):
        status = "PASS" if passed else ("FAIL" if fatal else "FAIL (reported)")
        line = f"{name}: {status}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
