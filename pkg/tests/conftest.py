"""Shared fixtures; collects acceptance results into one summary block."""
import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    """``report(n, passed, detail)`` records the one-line verdict of criterion ``n``."""

    def _report(n: int, passed: bool, detail: str) -> bool:
        _ACCEPTANCE[n] = f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
