import pytest

# criterion number -> (title, passed, detail), filled by the acceptance tests
CRITERIA: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, title, passed, detail)``."""
    def record(n: int, title: str, passed: bool, detail: str) -> None:
        CRITERIA[n] = (title, bool(passed), detail)
        print(f"criterion {n:2d} {'PASS' if passed else 'FAIL'}: {title} [{detail}]")
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        title, ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {title} [{detail}]")
