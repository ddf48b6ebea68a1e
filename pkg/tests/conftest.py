import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ctxalign.formats import load_table1  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"
TABLE1 = Path(__file__).parents[1] / "src" / "ctxalign" / "data" / "responsibility_table1.csv"

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def table1():
    return load_table1()


@pytest.fixture
def table1_path():
    return TABLE1


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[2:])):
        ok, desc = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {desc}")
