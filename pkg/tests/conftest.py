import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store one pass/fail line for an acceptance criterion."""

    def _record(number: int, ok: bool, summary: str):
        ACCEPTANCE[number] = (ok, summary)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {summary}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, summary = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {summary}")
