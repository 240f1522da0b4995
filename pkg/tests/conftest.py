import pytest

_RESULTS: dict[str, tuple[bool, str]] = {}


class AcceptanceLog:
    def record(self, criterion: str, passed: bool, detail: str) -> None:
        _RESULTS[criterion] = (bool(passed), detail)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_RESULTS, key=lambda s: int(s.split()[0])):
        passed, detail = _RESULTS[name]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
