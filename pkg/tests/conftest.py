from pathlib import Path

import pytest

from waerden_chart.ingest import load_wide_csv

DATA = Path(__file__).resolve().parent.parent / "data"


def load_dataset(name: str):
    return load_wide_csv((DATA / name).read_text())


@pytest.fixture(scope="session")
def app1():
    """Five simulated normal groups, sizes 15, 11, 12, 14, 14."""
    return load_dataset("application1_wide.csv")


@pytest.fixture(scope="session")
def sprays():
    """Insect counts under six sprays, 12 per spray (heavily tied)."""
    return load_dataset("insect_sprays_wide.csv")


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
