from __future__ import annotations

import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion_line():
    """Record one PASS/FAIL line per acceptance criterion and return the flag."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
