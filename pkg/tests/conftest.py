import pytest

# (criterion number, title, passed, detail), filled by the acceptance suite
ACCEPTANCE = []


@pytest.fixture
def acceptance():
    def record(number, title, passed, detail):
        ACCEPTANCE.append((number, title, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail})")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} ({detail})")
