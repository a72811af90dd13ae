"""Shared test plumbing: one printed pass/fail line per acceptance criterion."""

import pytest

_criteria: list[tuple[str, bool, str]] = []


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    """Log a criterion outcome for the end-of-run summary (and stdout)."""
    _criteria.append((name, ok, detail))
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_criteria):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
