from __future__ import annotations

import pytest

_VERDICTS: list[str] = []


class Criterion:
    """Prints and records one PASS/FAIL line for an acceptance criterion."""

    def __init__(self, capsys):
        self._capsys = capsys

    def __call__(self, number: int, name: str, ok: bool, detail: str) -> bool:
        line = f"AC{number:<2} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        _VERDICTS.append(line)
        with self._capsys.disabled():
            print("\n" + line, flush=True)
        return ok


@pytest.fixture
def criterion(capsys):
    return Criterion(capsys)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s[2:4])):
            terminalreporter.write_line(line)
