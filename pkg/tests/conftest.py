import pytest

ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    def record(number, title, results):
        ACCEPTANCE[number] = (title, results)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, results = ACCEPTANCE[number]
        ok = all(r.passed for r in results)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}")
        for r in results:
            tr.write_line("      " + r.line())
