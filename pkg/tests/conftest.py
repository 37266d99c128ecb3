"""Shared fixtures; collects acceptance-criterion verdicts for the summary."""

import pytest

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def criterion_log():
    """Record (name, passed, detail) and assert; the hook prints one line each."""

    def record(name: str, passed: bool, detail: str) -> None:
        _CRITERIA.append((name, bool(passed), detail))
        assert passed, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(_CRITERIA):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}: {detail}")
