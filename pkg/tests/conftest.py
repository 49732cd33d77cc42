import pytest

ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    """Collects ``(number, title, passed, detail)`` for the end-of-run table."""

    def add(number, title, passed, detail=""):
        ACCEPTANCE.append((number, title, bool(passed), detail))
        return passed

    return add


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
