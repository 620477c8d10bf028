import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from incomesim.economy import (  # noqa: E402
    AgeStructure,
    EconomySeries,
    PopulationBase,
    load_age_structure,
    load_economy,
    load_pid_tables,
)

DATA = Path(__file__).resolve().parents[1] / "src" / "incomesim" / "data"


def flat_economy(first=1880, last=2100, gdp=10000.0):
    years = np.arange(first, last + 1)
    n = len(years)
    return EconomySeries(years, np.full(n, gdp), np.full(n, gdp), np.full(n, gdp), np.full(n, 1e6), np.full(n, 9e5))


def growing_economy(first=1880, last=2100, rate=0.02, base_year=1960, gdp=10000.0):
    years = np.arange(first, last + 1)
    real = gdp * (1 + rate) ** (years - base_year)
    n = len(years)
    return EconomySeries(years, real, real, real, np.full(n, 1e6), np.full(n, 9e5))


def single_age(years, age=30, count=1000.0):
    return AgeStructure.from_arrays([(y, age, count) for y in years])


@pytest.fixture(scope="session")
def economy():
    return load_economy(DATA / "economy.csv")


@pytest.fixture(scope="session")
def ages():
    return load_age_structure(DATA / "ages.csv")


def _by_year(name):
    return {t.year: t for t in load_pid_tables(DATA / name) if t.population_base is PopulationBase.WITH_INCOME}


@pytest.fixture(scope="session")
def crude():
    return _by_year("pid_crude.csv")


@pytest.fixture(scope="session")
def fine():
    return _by_year("pid_fine.csv")


@pytest.fixture(scope="session")
def extended():
    return _by_year("pid_fine_extended.csv")


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for text in ACCEPTANCE:
            terminalreporter.write_line(text)
