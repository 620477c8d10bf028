"""Driving data: GDP/GPI series, single-year-of-age population, binned PIDs.

Every loader validates on the way in and raises a ``DataError`` subclass that
names the file and line of the offending row.  Loaded objects are frozen.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

ECONOMY_COLUMNS = (
    "year",
    "real_gdp_pc",
    "nominal_gdp_pc",
    "nominal_gpi_pc_with_income",
    "pop_15plus",
    "pop_with_income",
)
AGES_COLUMNS = ("year", "age", "count")
PID_COLUMNS = ("year", "population_base", "bin_lower", "bin_upper", "count", "mean_income")


class DataError(ValueError):
    """Base class for input validation failures."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f", line {line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class MissingColumn(DataError):
    pass


class NonContiguousYears(DataError):
    def __init__(self, year: int, path: str | None = None, line: int | None = None):
        super().__init__(f"year {year} missing from series", path, line)
        self.year = year


class NonPositiveValue(DataError):
    pass


class OverlappingBins(DataError):
    pass


class InvalidBin(DataError):
    pass


class YearOutOfRange(DataError):
    def __init__(self, year: int, first: int, last: int):
        super().__init__(f"year {year} outside data range {first}-{last}")
        self.year = year


class Law(enum.Enum):
    LINEAR = "linear"
    SQUARE_ROOT = "sqrt"


class PopulationBase(enum.Enum):
    WITH_INCOME = "WithIncome"
    ALL_15_PLUS = "All15Plus"


class IncomeUnits(enum.Enum):
    CURRENT_DOLLARS = "CurrentDollars"
    CONSTANT_DOLLARS = "ConstantDollars"
    MODEL_UNITS = "ModelUnits"


# ---------------------------------------------------------------------------
# number parsing / canonical formatting


def parse_number(text: str, path: str | None = None, line: int | None = None) -> float:
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise DataError(f"not a number: {text!r}", path, line) from None
    if not value.is_finite():
        raise DataError(f"not a finite number: {text!r}", path, line)
    return float(value)


def format_number(value: float) -> str:
    """Canonical CSV form: integers without a decimal point, else shortest repr."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _read_rows(path: str | Path, columns: Sequence[str]) -> tuple[str, list[tuple[int, dict]]]:
    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise MissingColumn(f"missing column {col!r}", path, 1)
        rows = [(reader.line_num, row) for row in reader]
    return path, rows


# ---------------------------------------------------------------------------
# economy


@dataclass(frozen=True)
class EconomySeries:
    """Year-indexed macro series; all per-capita values are per person aged 15+.

    ``nominal_gpi_pc_with_income`` is divided by the population *with income*.
    """

    years: np.ndarray
    real_gdp_pc: np.ndarray
    nominal_gdp_pc: np.ndarray
    nominal_gpi_pc_with_income: np.ndarray
    pop_15plus: np.ndarray
    pop_with_income: np.ndarray

    def __post_init__(self):
        for name in ("years",) + ECONOMY_COLUMNS[1:]:
            arr = np.array(getattr(self, name), dtype=int if name == "years" else float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def first_year(self) -> int:
        return int(self.years[0])

    @property
    def last_year(self) -> int:
        return int(self.years[-1])

    def __len__(self) -> int:
        return len(self.years)

    def index(self, year: int) -> int:
        if not self.first_year <= year <= self.last_year:
            raise YearOutOfRange(year, self.first_year, self.last_year)
        return int(year) - self.first_year

    def real_gdp(self, year: int) -> float:
        return float(self.real_gdp_pc[self.index(year)])

    def extended_back(self, first_year: int, growth: float | None = None) -> "EconomySeries":
        """Back-extrapolate real GDP per capita to ``first_year``.

        Uses the earliest observed year-over-year growth factor unless
        ``growth`` is given.  Only the real
        GDP column matters for the model; the other columns are held at their
        earliest values.
        """
        if first_year >= self.first_year:
            return self
        if growth is None and len(self) < 2:
            raise DataError("need at least two years to extrapolate")
        if growth is None:
            growth = self.real_gdp_pc[1] / self.real_gdp_pc[0]
        n = self.first_year - first_year
        back = self.real_gdp_pc[0] * growth ** -np.arange(n, 0, -1)

        def pad(arr):
            return np.concatenate([np.full(n, arr[0]), arr])

        return EconomySeries(
            years=np.arange(first_year, self.last_year + 1),
            real_gdp_pc=np.concatenate([back, self.real_gdp_pc]),
            nominal_gdp_pc=pad(self.nominal_gdp_pc),
            nominal_gpi_pc_with_income=pad(self.nominal_gpi_pc_with_income),
            pop_15plus=pad(self.pop_15plus),
            pop_with_income=pad(self.pop_with_income),
        )

    def restricted(self, first: int, last: int) -> "EconomySeries":
        i, j = self.index(first), self.index(last) + 1
        return EconomySeries(
            self.years[i:j], self.real_gdp_pc[i:j], self.nominal_gdp_pc[i:j],
            self.nominal_gpi_pc_with_income[i:j], self.pop_15plus[i:j], self.pop_with_income[i:j],
        )


def validate_economy(series: EconomySeries, path: str | None = None, lines: Sequence[int] | None = None):
    years = series.years
    if len(years) == 0:
        raise DataError("empty economy series", path)
    for i in range(1, len(years)):
        if years[i] != years[i - 1] + 1:
            line = lines[i] if lines else None
            if years[i] <= years[i - 1]:
                raise DataError(f"years not increasing at {years[i]}", path, line)
            raise NonContiguousYears(int(years[i - 1]) + 1, path, line)
    for name in ECONOMY_COLUMNS[1:]:
        arr = getattr(series, name)
        bad = np.flatnonzero(~(arr > 0))
        if bad.size:
            i = int(bad[0])
            raise NonPositiveValue(
                f"{name} = {format_number(arr[i])} in year {years[i]} must be positive",
                path, lines[i] if lines else None,
            )
    over = np.flatnonzero(series.pop_with_income > series.pop_15plus)
    if over.size:
        i = int(over[0])
        raise DataError(
            f"pop_with_income exceeds pop_15plus in year {years[i]}", path, lines[i] if lines else None
        )


def load_economy(path: str | Path) -> EconomySeries:
    path, rows = _read_rows(path, ECONOMY_COLUMNS)
    values = {c: [] for c in ECONOMY_COLUMNS}
    lines = []
    for line, row in rows:
        for col in ECONOMY_COLUMNS:
            values[col].append(parse_number(row[col], path, line))
        lines.append(line)
    years = values.pop("year")
    if any(not float(y).is_integer() for y in years):
        raise DataError("non-integer year", path)
    series = EconomySeries(years=np.array(years, dtype=int), **values)
    validate_economy(series, path, lines)
    return series


def dump_economy(series: EconomySeries) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ECONOMY_COLUMNS)
    for i, year in enumerate(series.years):
        w.writerow([str(int(year))] + [format_number(getattr(series, c)[i]) for c in ECONOMY_COLUMNS[1:]])
    return out.getvalue()


def growth_factor(series: EconomySeries, t0: int, t: int, law: Law = Law.LINEAR) -> float:
    """Cumulative growth of real GDP per capita between ``t0`` and ``t``."""
    ratio = series.real_gdp(t) / series.real_gdp(t0)
    if law is Law.SQUARE_ROOT:
        return math.sqrt(ratio)
    return ratio


@dataclass(frozen=True)
class Coverage:
    years: np.ndarray
    gpi_over_gdp: np.ndarray
    with_income_fraction: np.ndarray

    def at(self, year: int) -> tuple[float, float]:
        i = int(np.searchsorted(self.years, year))
        if i >= len(self.years) or self.years[i] != year:
            raise YearOutOfRange(year, int(self.years[0]), int(self.years[-1]))
        return float(self.gpi_over_gdp[i]), float(self.with_income_fraction[i])


def coverage_ratios(series: EconomySeries) -> Coverage:
    gpi_total = series.nominal_gpi_pc_with_income * series.pop_with_income
    gdp_total = series.nominal_gdp_pc * series.pop_15plus
    return Coverage(
        years=series.years.copy(),
        gpi_over_gdp=gpi_total / gdp_total,
        with_income_fraction=series.pop_with_income / series.pop_15plus,
    )


# ---------------------------------------------------------------------------
# age structure


@dataclass(frozen=True)
class AgeStructure:
    """Persons by calendar year and single year of age (15 and over)."""

    table: dict = field(repr=False)  # year -> (first_age, counts array)

    @property
    def years(self) -> list[int]:
        return sorted(self.table)

    def counts(self, year: int) -> tuple[np.ndarray, np.ndarray]:
        if year not in self.table:
            raise DataError(f"no age counts for year {year}")
        first, counts = self.table[year]
        return np.arange(first, first + len(counts)), counts

    def total(self, year: int) -> float:
        return float(self.counts(year)[1].sum())

    @classmethod
    def from_arrays(cls, rows: Iterable[tuple[int, int, float]]) -> "AgeStructure":
        by_year: dict[int, list[tuple[int, float]]] = {}
        for year, age, count in rows:
            by_year.setdefault(int(year), []).append((int(age), float(count)))
        table = {}
        for year, items in by_year.items():
            items.sort()
            ages = [a for a, _ in items]
            if ages != list(range(ages[0], ages[0] + len(ages))):
                raise DataError(f"ages not contiguous in year {year}")
            counts = np.array([c for _, c in items])
            counts.setflags(write=False)
            table[year] = (ages[0], counts)
        return cls(table)


def load_age_structure(path: str | Path) -> AgeStructure:
    path, rows = _read_rows(path, AGES_COLUMNS)
    parsed = []
    for line, row in rows:
        year = parse_number(row["year"], path, line)
        age = parse_number(row["age"], path, line)
        count = parse_number(row["count"], path, line)
        if count < 0:
            raise NonPositiveValue(f"negative count {row['count']}", path, line)
        if age < 15:
            raise DataError(f"age {row['age']} below 15", path, line)
        parsed.append((int(year), int(age), count))
    try:
        ages = AgeStructure.from_arrays(parsed)
    except DataError as exc:
        raise DataError(str(exc), path) from None
    years = ages.years
    if not years:
        raise DataError("no age counts", path)
    missing = sorted(set(range(years[0], years[-1] + 1)) - set(years))
    if missing:
        raise NonContiguousYears(missing[0], path)
    return ages


def dump_age_structure(ages: AgeStructure) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(AGES_COLUMNS)
    for year in ages.years:
        for age, count in zip(*ages.counts(year)):
            w.writerow([str(year), str(int(age)), format_number(count)])
    return out.getvalue()


# ---------------------------------------------------------------------------
# binned personal income distributions


@dataclass(frozen=True)
class Bin:
    lower: float
    upper: float | None  # None = open-ended
    count: float
    mean_income: float | None = None

    @property
    def is_open(self) -> bool:
        return self.upper is None

    @property
    def width(self) -> float:
        if self.upper is None:
            return math.inf
        return self.upper - self.lower

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class BinnedPid:
    year: int
    bins: tuple[Bin, ...]
    population_base: PopulationBase = PopulationBase.WITH_INCOME
    income_units: IncomeUnits = IncomeUnits.CURRENT_DOLLARS

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(self.bins))
        validate_bins(self.bins)

    @property
    def total_count(self) -> float:
        return float(sum(b.count for b in self.bins))

    @property
    def closed_bins(self) -> tuple[Bin, ...]:
        return tuple(b for b in self.bins if not b.is_open)

    @property
    def open_bin(self) -> Bin | None:
        last = self.bins[-1] if self.bins else None
        return last if last is not None and last.is_open else None

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([b.lower for b in self.bins])
        hi = np.array([np.inf if b.upper is None else b.upper for b in self.bins])
        return lo, hi

    def counts(self) -> np.ndarray:
        return np.array([b.count for b in self.bins])


def validate_bins(bins: Sequence[Bin], path: str | None = None, lines: Sequence[int] | None = None):
    def where(i):
        return lines[i] if lines else None

    for i, b in enumerate(bins):
        if b.count < 0:
            raise InvalidBin(f"negative count in bin [{format_number(b.lower)}, ...)", path, where(i))
        if b.upper is None:
            if i != len(bins) - 1:
                raise InvalidBin("open-ended bin must be the last bin", path, where(i))
        elif not b.lower < b.upper and not (b.lower == b.upper == 0 and i == 0):
            raise InvalidBin(
                f"bin lower {format_number(b.lower)} not below upper {format_number(b.upper)}",
                path, where(i),
            )
        if b.mean_income is not None:
            too_high = b.upper is not None and b.mean_income > b.upper
            if b.mean_income < b.lower or too_high:
                raise InvalidBin(f"mean income {format_number(b.mean_income)} outside its bin", path, where(i))
        if i > 0:
            prev = bins[i - 1]
            if prev.upper is None or b.lower < prev.upper:
                raise OverlappingBins(
                    f"bin starting at {format_number(b.lower)} overlaps previous bin", path, where(i)
                )


def load_pid_tables(path: str | Path, income_units: IncomeUnits = IncomeUnits.CURRENT_DOLLARS) -> list[BinnedPid]:
    """One ``BinnedPid`` per (year, population_base), in file order of first appearance."""
    path, rows = _read_rows(path, PID_COLUMNS)
    groups: dict[tuple[int, PopulationBase], list[tuple[int, Bin]]] = {}
    for line, row in rows:
        year = parse_number(row["year"], path, line)
        try:
            base = PopulationBase(row["population_base"].strip())
        except ValueError:
            raise DataError(f"unknown population_base {row['population_base']!r}", path, line) from None
        upper_text = row["bin_upper"].strip()
        mean_text = (row.get("mean_income") or "").strip()
        b = Bin(
            lower=parse_number(row["bin_lower"], path, line),
            upper=parse_number(upper_text, path, line) if upper_text else None,
            count=parse_number(row["count"], path, line),
            mean_income=parse_number(mean_text, path, line) if mean_text else None,
        )
        groups.setdefault((int(year), base), []).append((line, b))
    tables = []
    for (year, base), items in groups.items():
        lines = [ln for ln, _ in items]
        bins = [b for _, b in items]
        validate_bins(bins, path, lines)
        tables.append(BinnedPid(year, tuple(bins), base, income_units))
    return tables


def dump_pid_tables(tables: Iterable[BinnedPid], number=format_number) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(PID_COLUMNS)
    for pid in tables:
        for b in pid.bins:
            w.writerow([
                str(pid.year),
                pid.population_base.value,
                number(b.lower),
                "" if b.upper is None else number(b.upper),
                number(b.count),
                "" if b.mean_income is None else number(b.mean_income),
            ])
    return out.getvalue()
