"""Regenerate the desk-scale data files shipped in ``src/incomesim/data``.

The sandbox this package was written in has no access to BEA/Census
services, so the bundled inputs are reconstructions:

* economy.csv  -- real GDP from annual BEA-style growth rates anchored at
  $9817bn (chained 2000 dollars) in 2000; nominal GDP via an annual GDP
  deflator path (2000 = 1); population 15+ interpolated between Census
  five-year anchors; with-income share and GPI/GDP share interpolated
  between the values the CPS/NIPA record shows at turning points.
  All per-capita values are per person aged 15 and over.
* ages.csv     -- cohort-component reconstruction: historical birth counts
  survived with a Gompertz-Makeham hazard whose level falls over time, then
  rescaled each year to the population-15+ anchor (absorbs net migration).
* pid_*.csv    -- synthetic binned PIDs.  Persons with income have a
  truncated exponential density below a threshold and a Pareto tail above
  it, both in income normalized by GPI per person with income; bin edges
  follow the CPS layouts of each era.  Counts carry a small seeded
  multiplicative noise and are rounded to thousands like the P60 tables.
  Open-bin means for 2005 are the published CPS values.

Run:  python scripts/build_bundled_data.py [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np
from scipy import integrate

from incomesim.economy import (
    AgeStructure,
    Bin,
    BinnedPid,
    EconomySeries,
    dump_age_structure,
    dump_economy,
    dump_pid_tables,
)

FIRST, LAST = 1947, 2005
YEARS = np.arange(FIRST, LAST + 1)

# real GDP growth, percent, for year t over t-1
REAL_GROWTH = {
    1948: 4.1, 1949: -0.6, 1950: 8.7, 1951: 8.1, 1952: 4.1, 1953: 4.7, 1954: -0.6,
    1955: 7.1, 1956: 2.1, 1957: 2.1, 1958: -0.7, 1959: 6.9, 1960: 2.6, 1961: 2.6,
    1962: 6.1, 1963: 4.4, 1964: 5.8, 1965: 6.5, 1966: 6.6, 1967: 2.7, 1968: 4.9,
    1969: 3.1, 1970: 0.2, 1971: 3.3, 1972: 5.3, 1973: 5.6, 1974: -0.5, 1975: -0.2,
    1976: 5.4, 1977: 4.6, 1978: 5.5, 1979: 3.2, 1980: -0.3, 1981: 2.5, 1982: -1.8,
    1983: 4.6, 1984: 7.2, 1985: 4.2, 1986: 3.5, 1987: 3.5, 1988: 4.2, 1989: 3.7,
    1990: 1.9, 1991: -0.1, 1992: 3.5, 1993: 2.8, 1994: 4.0, 1995: 2.7, 1996: 3.8,
    1997: 4.4, 1998: 4.5, 1999: 4.8, 2000: 4.1, 2001: 1.0, 2002: 1.7, 2003: 2.8,
    2004: 3.8, 2005: 3.5,
}
# GDP deflator inflation, percent
INFLATION = {
    1948: 6.1, 1949: -0.6, 1950: 1.1, 1951: 6.8, 1952: 1.9, 1953: 1.4, 1954: 1.1,
    1955: 1.7, 1956: 3.2, 1957: 3.4, 1958: 2.0, 1959: 1.3, 1960: 1.4, 1961: 1.1,
    1962: 1.4, 1963: 1.2, 1964: 1.5, 1965: 1.8, 1966: 2.8, 1967: 3.1, 1968: 4.3,
    1969: 4.9, 1970: 5.3, 1971: 5.0, 1972: 4.3, 1973: 5.6, 1974: 9.0, 1975: 9.5,
    1976: 5.8, 1977: 6.4, 1978: 7.0, 1979: 8.3, 1980: 9.1, 1981: 9.4, 1982: 6.1,
    1983: 3.9, 1984: 3.8, 1985: 3.0, 1986: 2.2, 1987: 2.7, 1988: 3.4, 1989: 3.8,
    1990: 3.9, 1991: 3.5, 1992: 2.3, 1993: 2.3, 1994: 2.1, 1995: 2.0, 1996: 1.9,
    1997: 1.7, 1998: 1.1, 1999: 1.4, 2000: 2.2, 2001: 2.3, 2002: 1.6, 2003: 2.1,
    2004: 2.9, 2005: 3.3,
}
REAL_GDP_2000 = 9817.0e9

# population aged 15+, millions
POP15 = {
    1947: 108.1, 1950: 111.4, 1955: 115.4, 1960: 124.6, 1965: 134.3, 1970: 147.2,
    1975: 162.0, 1980: 175.9, 1985: 186.5, 1990: 195.7, 1995: 209.0, 2000: 221.9,
    2005: 234.6,
}
WITH_INCOME_SHARE = {
    1947: 0.64, 1952: 0.70, 1960: 0.76, 1967: 0.82, 1975: 0.88, 1988: 0.93,
    1994: 0.92, 2002: 0.91, 2005: 0.89,
}
GPI_SHARE = {
    1947: 0.79, 1951: 0.76, 1960: 0.78, 1970: 0.80, 1980: 0.83, 1994: 0.85,
    2001: 0.86, 2005: 0.82,
}
# births, millions
BIRTHS = {
    1855: 1.15, 1860: 1.30, 1870: 1.50, 1880: 1.90, 1890: 2.20, 1900: 2.50,
    1910: 2.78, 1915: 2.97, 1920: 2.95, 1925: 2.91, 1930: 2.62, 1933: 2.31,
    1936: 2.36, 1940: 2.56, 1943: 3.10, 1945: 2.86, 1946: 3.41, 1947: 3.82,
    1950: 3.63, 1954: 4.07, 1957: 4.31, 1961: 4.27, 1964: 4.03, 1968: 3.50,
    1970: 3.73, 1973: 3.14, 1976: 3.17, 1980: 3.61, 1985: 3.76, 1990: 4.16,
}
MAX_AGE = 100


def interp(table, years, log=False):
    xs = np.array(sorted(table), dtype=float)
    ys = np.array([table[k] for k in sorted(table)], dtype=float)
    if log:
        return np.exp(np.interp(years, xs, np.log(ys)))
    return np.interp(years, xs, ys)


def age_structure():
    """Cohort survival with falling Gompertz level; rows rescaled to POP15."""
    rows = []
    ages = np.arange(15, MAX_AGE + 1)
    pop15 = interp(POP15, YEARS, log=True) * 1e6
    for k, year in enumerate(YEARS):
        birth_years = year - ages
        births = interp(BIRTHS, birth_years, log=True)
        # cohort hazard approximated by the period hazard at the cohort's midlife
        mid = birth_years + ages / 2.0
        level = 1.5e-4 * np.exp(-0.012 * (mid - 1900))
        makeham = 0.004 * np.exp(-0.02 * (mid - 1900))
        slope = 0.085
        log_surv = -(makeham * ages + level / slope * (np.exp(slope * ages) - 1.0))
        counts = births * np.exp(log_surv)
        counts *= pop15[k] / counts.sum()
        rows.extend((int(year), int(a), float(round(c))) for a, c in zip(ages, counts))
    return AgeStructure.from_arrays(rows)


def economy(ages):
    real = np.empty(len(YEARS))
    deflator = np.empty(len(YEARS))
    i2000 = 2000 - FIRST
    real[i2000], deflator[i2000] = REAL_GDP_2000, 1.0
    for i in range(i2000 + 1, len(YEARS)):
        real[i] = real[i - 1] * (1 + REAL_GROWTH[FIRST + i] / 100)
        deflator[i] = deflator[i - 1] * (1 + INFLATION[FIRST + i] / 100)
    for i in range(i2000 - 1, -1, -1):
        real[i] = real[i + 1] / (1 + REAL_GROWTH[FIRST + i + 1] / 100)
        deflator[i] = deflator[i + 1] / (1 + INFLATION[FIRST + i + 1] / 100)
    pop15 = np.array([ages.total(int(y)) for y in YEARS])
    with_income = np.round(pop15 * interp(WITH_INCOME_SHARE, YEARS))
    nominal = real * deflator
    gpi = nominal * interp(GPI_SHARE, YEARS)
    return EconomySeries(
        years=YEARS,
        real_gdp_pc=np.round(real / pop15, 2),
        nominal_gdp_pc=np.round(nominal / pop15, 2),
        nominal_gpi_pc_with_income=np.round(gpi / with_income, 2),
        pop_15plus=pop15,
        pop_with_income=with_income,
    )


# ---------------------------------------------------------------------------
# synthetic PIDs

THRESHOLD = 1.2  # Pareto threshold / GPI per person with income
TAIL_SHARE = 0.15  # share of persons with income above the threshold
EXP_SCALE = 0.8  # exponential scale below threshold, same units
TAIL_EXPONENT = 2.35  # density ~ x^-(1 + exponent)


class TrueDensity:
    """Normalized-income law: truncated exponential + Pareto tail."""

    def __init__(self, scale_dollars):
        self.g = scale_dollars
        self.xp = THRESHOLD * scale_dollars
        self.s = EXP_SCALE * scale_dollars
        self.z = 1.0 - np.exp(-self.xp / self.s)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        below = (1 - TAIL_SHARE) * (1 - np.exp(-np.minimum(x, self.xp) / self.s)) / self.z
        above = TAIL_SHARE * (1 - (self.xp / np.maximum(x, self.xp)) ** TAIL_EXPONENT)
        return np.where(np.isinf(x), 1.0, below + above)

    def partial_mean(self, a, b):
        """Integral of x * pdf over [a, b)."""
        def pdf_x(x):
            if x < self.xp:
                return x * (1 - TAIL_SHARE) * np.exp(-x / self.s) / (self.s * self.z)
            return x * TAIL_SHARE * TAIL_EXPONENT * self.xp**TAIL_EXPONENT / x ** (TAIL_EXPONENT + 1)

        total = 0.0
        lo = a
        if lo < self.xp:
            hi = min(b, self.xp)
            total += integrate.quad(pdf_x, lo, hi)[0]
            lo = hi
        if b > lo:
            m = TAIL_EXPONENT
            upper = 0.0 if np.isinf(b) else b ** (1 - m)
            total += TAIL_SHARE * m / (m - 1) * self.xp**m * (lo ** (1 - m) - upper)
        return total


CRUDE_EDGES = [0, 2000, 4000, 6000, 8000, 10000, 12500, 15000, 20000, 25000]


def fine_edges(year):
    if year <= 1951:
        return [0, 500, 1000, 1500, 2000, 2500, 3000, 3500, 4000, 4500, 5000, 6000, 7000, 10000]
    if year <= 1966:
        return list(range(0, 5001, 500)) + [6000, 7000, 8000, 10000, 15000, 25000]
    if year <= 1979:
        return list(range(0, 10001, 1000)) + [12000, 15000, 20000, 25000, 35000, 50000]
    if year <= 1993:
        return list(range(0, 50001, 2500)) + [60000, 75000, 100000]
    return list(range(0, 100001, 2500))


EXTENDED_TOP = [100000, 150000, 200000, 250000]
# published CPS means of open-ended bins, 2005
OPEN_MEANS_2005 = {100000: 176068.0, 250000: 470616.0}


def binned(law, edges, total, rng, with_means):
    lo = np.array(edges, dtype=float)
    hi = np.append(lo[1:], np.inf)
    shares = np.diff(law.cdf(np.append(lo, np.inf)))
    noise = 1 + 0.03 * rng.standard_normal(len(shares))
    counts = np.round(total * shares * noise / 1000) * 1000
    bins = []
    for a, b, c, p in zip(lo, hi, counts, shares):
        mean = None
        if with_means and p > 0:
            mean = round(law.partial_mean(a, b) / p)
            mean = float(min(max(mean, a), b if np.isfinite(b) else mean))
        bins.append(Bin(float(a), None if np.isinf(b) else float(b), float(c), mean))
    return bins


def pid_tables(series):
    rng = np.random.default_rng(1947)
    crude, fine, extended = [], [], []
    for i, year in enumerate(series.years):
        year = int(year)
        law = TrueDensity(series.nominal_gpi_pc_with_income[i])
        total = series.pop_with_income[i]
        if year <= 1987:
            crude.append(BinnedPid(year, binned(law, CRUDE_EDGES, total, rng, False)))
        means = year >= 2000
        bins = binned(law, fine_edges(year), total, rng, means)
        if year == 2005:
            last = bins[-1]
            bins[-1] = Bin(last.lower, None, last.count, OPEN_MEANS_2005[100000])
        fine.append(BinnedPid(year, bins))
        if year >= 2000:
            bins = binned(law, fine_edges(year) + EXTENDED_TOP[1:], total, rng, True)
            if year == 2005:
                last = bins[-1]
                bins[-1] = Bin(last.lower, None, last.count, OPEN_MEANS_2005[250000])
            extended.append(BinnedPid(year, bins))
    return crude, fine, extended


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "src" / "incomesim" / "data"
    parser.add_argument("--out", type=Path, default=default)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    ages = age_structure()
    series = economy(ages)
    crude, fine, extended = pid_tables(series)
    (args.out / "ages.csv").write_text(dump_age_structure(ages))
    (args.out / "economy.csv").write_text(dump_economy(series))
    (args.out / "pid_crude.csv").write_text(dump_pid_tables(crude))
    (args.out / "pid_fine.csv").write_text(dump_pid_tables(fine))
    (args.out / "pid_fine_extended.csv").write_text(dump_pid_tables(extended))
    print(f"wrote bundled data to {args.out}")


if __name__ == "__main__":
    main()
