import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from neurnkit.archspec import default_alphabet, fixture_specs  # noqa: E402


@pytest.fixture(scope="session")
def alphabet():
    return default_alphabet()


@pytest.fixture(scope="session")
def specs12():
    return fixture_specs()


@pytest.fixture(scope="session")
def specs_all():
    return fixture_specs(extra=True)


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, shown in the summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
