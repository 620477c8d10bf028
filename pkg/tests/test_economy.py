import math

import numpy as np
import pytest

from conftest import DATA
from incomesim.economy import (
    Bin,
    BinnedPid,
    InvalidBin,
    Law,
    MissingColumn,
    NonContiguousYears,
    NonPositiveValue,
    OverlappingBins,
    PopulationBase,
    YearOutOfRange,
    coverage_ratios,
    dump_age_structure,
    dump_economy,
    dump_pid_tables,
    growth_factor,
    load_age_structure,
    load_economy,
    load_pid_tables,
)

HEADER = "year,real_gdp_pc,nominal_gdp_pc,nominal_gpi_pc_with_income,pop_15plus,pop_with_income\n"


def write(tmp_path, text, name="f.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def economy_rows(years, gdp=lambda y: 100 + y - 1947):
    return "".join(f"{y},{gdp(y)},50,60,1000,900\n" for y in years)


def test_bundled_economy_has_59_years(economy):
    assert len(economy) == 59
    assert (economy.first_year, economy.last_year) == (1947, 2005)


def test_gap_names_missing_year(tmp_path):
    years = [y for y in range(1985, 1996) if y != 1990]
    p = write(tmp_path, HEADER + economy_rows(years))
    with pytest.raises(NonContiguousYears) as exc:
        load_economy(p)
    assert exc.value.year == 1990
    assert "line 7" in str(exc.value)


def test_zero_gdp_rejected_with_row(tmp_path):
    p = write(tmp_path, HEADER + economy_rows(range(1990, 1995), lambda y: 0 if y == 1992 else 5))
    with pytest.raises(NonPositiveValue, match="line 4"):
        load_economy(p)


def test_missing_column(tmp_path):
    p = write(tmp_path, "year,real_gdp_pc\n1990,1\n")
    with pytest.raises(MissingColumn, match="nominal_gdp_pc"):
        load_economy(p)


def test_pop_with_income_cannot_exceed_total(tmp_path):
    p = write(tmp_path, HEADER + "1990,1,1,1,10,11\n")
    with pytest.raises(ValueError, match="exceeds"):
        load_economy(p)


def test_growth_factor_identity_and_square(economy):
    assert growth_factor(economy, 1970, 1970, Law.LINEAR) == 1.0
    assert growth_factor(economy, 1970, 1970, Law.SQUARE_ROOT) == 1.0
    from conftest import growing_economy
    e = growing_economy(rate=1.0, first=1958, last=1962)  # doubles each year
    assert growth_factor(e, 1960, 1962, Law.SQUARE_ROOT) == pytest.approx(2.0, rel=1e-12)


def test_growth_1960_2002_near_published(economy):
    # published: real GDP per capita grew 2.22 times, square root 1.49
    ratio = growth_factor(economy, 1960, 2002)
    assert ratio == pytest.approx(2.22, abs=0.07)
    assert growth_factor(economy, 1960, 2002, Law.SQUARE_ROOT) == pytest.approx(1.49, abs=0.025)


def test_growth_factor_out_of_range(economy):
    with pytest.raises(YearOutOfRange):
        growth_factor(economy, 1960, 2010)


def test_coverage_published_endpoints(economy):
    cov = coverage_ratios(economy)
    assert cov.at(1947)[1] == pytest.approx(0.64, abs=0.005)
    assert cov.at(1988)[1] == pytest.approx(0.93, abs=0.005)
    assert cov.with_income_fraction.min() == pytest.approx(0.64, abs=0.005)
    assert cov.with_income_fraction.max() == pytest.approx(0.93, abs=0.005)
    assert np.all((cov.gpi_over_gdp > 0) & (cov.gpi_over_gdp <= 1))
    assert np.all((cov.with_income_fraction > 0) & (cov.with_income_fraction <= 1))


def test_full_coverage_is_one(tmp_path):
    e = load_economy(write(tmp_path, HEADER + "1990,1,1,1,10,10\n"))
    assert coverage_ratios(e).at(1990)[1] == 1.0


def test_extended_back_uses_earliest_growth(economy):
    ext = economy.extended_back(1900)
    g = economy.real_gdp_pc[1] / economy.real_gdp_pc[0]
    assert ext.first_year == 1900
    assert ext.real_gdp(1946) == pytest.approx(economy.real_gdp(1947) / g)
    assert ext.real_gdp(1900) == pytest.approx(economy.real_gdp(1947) / g**47)
    np.testing.assert_array_equal(ext.restricted(1947, 2005).real_gdp_pc, economy.real_gdp_pc)


def test_economy_round_trip_bundled():
    text = (DATA / "economy.csv").read_text()
    assert dump_economy(load_economy(DATA / "economy.csv")) == text


def test_ages_round_trip_bundled(ages):
    assert dump_age_structure(ages) == (DATA / "ages.csv").read_text()
    a, c = ages.counts(1947)
    assert a[0] == 15 and np.all(c >= 0)


def test_ages_reject_negative_and_young(tmp_path):
    with pytest.raises(NonPositiveValue, match="line 2"):
        load_age_structure(write(tmp_path, "year,age,count\n1990,15,-1\n"))
    with pytest.raises(ValueError, match="below 15"):
        load_age_structure(write(tmp_path, "year,age,count\n1990,14,1\n"))


def test_ages_missing_year(tmp_path):
    text = "year,age,count\n1990,15,1\n1992,15,1\n"
    with pytest.raises(NonContiguousYears):
        load_age_structure(write(tmp_path, text))


def test_pid_round_trip_bundled():
    for name in ("pid_crude.csv", "pid_fine.csv", "pid_fine_extended.csv"):
        assert dump_pid_tables(load_pid_tables(DATA / name)) == (DATA / name).read_text()


def test_pid_open_bin_and_crude_1947(crude, fine):
    t = crude[1947]
    assert len(t.bins) == 10
    assert t.open_bin is not None and t.open_bin.lower == 25000
    assert [b.lower for b in t.bins[:3]] == [0, 2000, 4000]
    t05 = fine[2005]
    assert t05.bins[0].lower == 0 and t05.bins[0].upper == 2500
    assert sum(b.is_open for b in t05.bins) == 1


def test_pid_overlap_rejected_with_line(tmp_path):
    text = ("year,population_base,bin_lower,bin_upper,count,mean_income\n"
            "2000,WithIncome,0,100,5,\n2000,WithIncome,50,200,5,\n")
    with pytest.raises(OverlappingBins, match="line 3"):
        load_pid_tables(write(tmp_path, text))


def test_pid_bin_rules():
    with pytest.raises(InvalidBin, match="last"):
        BinnedPid(2000, (Bin(0, None, 1), Bin(10, 20, 1)))
    with pytest.raises(InvalidBin, match="outside"):
        BinnedPid(2000, (Bin(0, 10, 1, 11.0),))
    with pytest.raises(InvalidBin):
        BinnedPid(2000, (Bin(10, 10, 1),))
    ok = BinnedPid(2000, (Bin(0, 0, 3, 0.0), Bin(0, 10, 1)), PopulationBase.ALL_15_PLUS)
    assert ok.total_count == 4
    assert math.isinf(BinnedPid(2000, (Bin(5, None, 1),)).bins[0].width)


def test_unknown_population_base(tmp_path):
    text = "year,population_base,bin_lower,bin_upper,count,mean_income\n2000,Everyone,0,1,1,\n"
    with pytest.raises(ValueError, match="line 2"):
        load_pid_tables(write(tmp_path, text))
