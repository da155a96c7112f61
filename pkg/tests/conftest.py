"""Collects one verdict line per acceptance criterion and prints them at the end."""

from __future__ import annotations

import pytest

_VERDICTS: dict[int, list[tuple[bool, str]]] = {}


class Verdicts:
    def record(self, criterion: int, passed: bool, detail: str) -> bool:
        _VERDICTS.setdefault(criterion, []).append((bool(passed), detail))
        print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)


@pytest.fixture(scope="session")
def verdicts() -> Verdicts:
    return Verdicts()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_VERDICTS):
        parts = _VERDICTS[crit]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
