import pathlib

import pytest
from hypothesis import settings

from repairqa.syntax import parse_database, parse_program

SAMPLES = pathlib.Path(__file__).resolve().parents[1] / "samples"

settings.register_profile("repo", max_examples=60, deadline=None)
settings.load_profile("repo")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ex1():
    doc = parse_program((SAMPLES / "ex1.rules").read_text())
    db = parse_database((SAMPLES / "ex1.facts").read_text())
    return doc, db


@pytest.fixture(scope="session")
def cycle():
    doc = parse_program((SAMPLES / "cycle.rules").read_text())
    db = parse_database((SAMPLES / "cycle.facts").read_text())
    return doc, db


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number: int, name: str, ok: bool | None, detail: str = "") -> None:
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        line = f"criterion {number} {status}: {name}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
