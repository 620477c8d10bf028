"""Lorenz curves, Gini estimates and Pareto-tail tools for binned distributions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .economy import Bin, BinnedPid, DataError, PopulationBase
from .model import Convention

DEFAULT_CORRECTION = -0.12


class OpenBinUnresolved(ValueError):
    pass


class NonFiniteMean(ValueError):
    pass


class DegenerateMean(ValueError):
    pass


class InsufficientTailBins(ValueError):
    pass


class InsufficientBins(ValueError):
    pass


class PopulationUnderflow(ValueError):
    pass


class DisjointSupport(ValueError):
    pass


class NoOverlap(ValueError):
    pass


class GiniMethod(enum.Enum):
    TRAPEZOID = "Trapezoid"
    TRAPEZOID_PLUS_PARETO_TAIL = "TrapezoidPlusParetoTail"
    EXACT_MODEL = "ExactModel"


@dataclass(frozen=True)
class LorenzCurve:
    """Points (X_i, Y_i) from (0, 0) to (1, 1).

    If ``tail_exponent`` is set the last segment is not a chord but the
    Lorenz curve of a Pareto tail with that survival exponent.
    """

    x: np.ndarray
    y: np.ndarray
    tail_exponent: float | None = None

    def __post_init__(self):
        x = np.asarray(self.x, float)
        y = np.asarray(self.y, float)
        if x.shape != y.shape or x.size < 2:
            raise ValueError("Lorenz curve needs matching point arrays")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def area(self) -> float:
        """Exact area under the curve."""
        if self.tail_exponent is None:
            return _chord_area(self.x, self.y)
        head = _chord_area(self.x[:-1], self.y[:-1])
        p, i = 1.0 - self.x[-2], 1.0 - self.y[-2]
        return head + _pareto_segment_area(p, i, self.tail_exponent)


def _chord_area(x, y) -> float:
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1])) / 2)


def _pareto_segment_area(pop_share: float, income_share: float, exponent: float) -> float:
    """Area under the Lorenz curve over the top ``pop_share`` when those
    people hold ``income_share`` distributed as a Pareto tail."""
    if pop_share <= 0:
        return 0.0
    inv = 1.0 / exponent
    inner = income_share * (1.0 - inv) / (2.0 - inv)
    return pop_share * (1.0 - income_share) + pop_share * inner


@dataclass(frozen=True)
class GiniEstimate:
    value: float
    method: GiniMethod
    population_base: PopulationBase | None = None
    year: int | None = None


@dataclass(frozen=True)
class ParetoTail:
    """Pareto tail above ``x_m``; ``k`` read according to ``convention``."""

    x_m: float
    k: float
    convention: Convention = Convention.CONSISTENT

    def __post_init__(self):
        if not self.x_m > 0:
            raise ValueError("x_m must be positive")
        if not self.exponent > 1:
            raise NonFiniteMean(f"Pareto tail with k={self.k} has no finite mean")

    @property
    def exponent(self) -> float:
        """Survival-function exponent: P(X > x) = (x_m / x) ** exponent."""
        return self.k + 1 if self.convention is Convention.PAPER else self.k

    @property
    def mean(self) -> float:
        a = self.exponent
        return a * self.x_m / (a - 1)

    @property
    def gini(self) -> float:
        return 1.0 / (2 * self.exponent - 1)


@dataclass(frozen=True)
class TailSlice:
    pop_fraction: float  # share of tail persons in [a, b)
    income: float  # income per tail person earned in [a, b)
    income_fraction: float  # share of tail income earned in [a, b)
    conditional_mean: float


def pareto_tail_stats(tail: ParetoTail, a: float, b: float | None = None) -> TailSlice:
    """Population, income and mean of the tail slice [a, b); ``b=None`` is open."""
    a = max(a, tail.x_m)
    alpha = tail.exponent
    if b is not None and b <= a:
        return TailSlice(0.0, 0.0, 0.0, a)
    ra = (tail.x_m / a) ** alpha
    rb = 0.0 if b is None else (tail.x_m / b) ** alpha
    fa = (tail.x_m / a) ** (alpha - 1)
    fb = 0.0 if b is None else (tail.x_m / b) ** (alpha - 1)
    pop = ra - rb
    income_fraction = fa - fb
    income = tail.mean * income_fraction
    return TailSlice(pop, income, income_fraction, income / pop)


def estimate_k_open_end(x_m: float, x_av: float, convention: Convention = Convention.PAPER) -> float:
    """Pareto index from the threshold and the mean income above it."""
    if not x_av > x_m:
        raise DegenerateMean(f"mean {x_av} not above threshold {x_m}")
    if convention is Convention.PAPER:
        return x_m / (x_av - x_m)
    return x_av / (x_av - x_m)


# ---------------------------------------------------------------------------
# binned tables


def bin_means(pid: BinnedPid, correction: float = DEFAULT_CORRECTION, tail: ParetoTail | None = None) -> np.ndarray:
    """Mean income for every bin.

    Priority: reported mean, then the Pareto conditional mean for the open
    bin and for bins lying wholly above ``tail.x_m``, then center + correction * width clamped into the
    bin.  The open bin has no center; without a reported mean or a tail it
    gives NaN.
    """
    out = np.empty(len(pid.bins))
    for i, b in enumerate(pid.bins):
        if b.mean_income is not None:
            out[i] = b.mean_income
        elif tail is not None and (b.is_open or b.lower >= tail.x_m):
            out[i] = pareto_tail_stats(tail, b.lower, b.upper).conditional_mean
        elif b.is_open:
            out[i] = math.nan
        else:
            out[i] = min(max(b.center + correction * b.width, b.lower), b.upper)
    return out


def lorenz_from_bins(
    pid: BinnedPid,
    means=None,
    tail: ParetoTail | None = None,
    correction: float = DEFAULT_CORRECTION,
) -> LorenzCurve:
    """Cumulative population and income shares over the bins.

    When the open bin's mean comes from ``tail``, its segment is the exact
    Pareto Lorenz curve rather than a chord.
    """
    if means is None:
        means = bin_means(pid, correction, tail)
    means = np.asarray(means, float)
    counts = pid.counts()
    if pid.open_bin is not None and not np.isfinite(means[-1]):
        raise OpenBinUnresolved(f"open bin in {pid.year} needs a tail or a reported mean")
    income = counts * means
    if counts.sum() <= 0 or income.sum() <= 0:
        raise DataError(f"no population or income in {pid.year}")
    x = np.concatenate([[0.0], np.cumsum(counts) / counts.sum()])
    y = np.concatenate([[0.0], np.cumsum(income) / income.sum()])
    x[-1] = y[-1] = 1.0
    exponent = None
    top = pid.open_bin
    if tail is not None and top is not None and top.mean_income is None:
        exponent = tail.exponent
    return LorenzCurve(x, y, exponent)


def gini_trapezoid(curve: LorenzCurve, year=None, population_base=None) -> GiniEstimate:
    """G = 1 - sum (X_i - X_{i-1}) (Y_{i-1} + Y_i), chords everywhere."""
    x, y = curve.x, curve.y
    value = 1.0 - float(np.sum(np.diff(x) * (y[1:] + y[:-1])))
    return GiniEstimate(value, GiniMethod.TRAPEZOID, population_base, year)


def gini(curve: LorenzCurve, year=None, population_base=None) -> GiniEstimate:
    """Chords below the tail, the exact Pareto segment in it (if any)."""
    if curve.tail_exponent is None:
        return gini_trapezoid(curve, year, population_base)
    value = 1.0 - 2.0 * curve.area()
    return GiniEstimate(value, GiniMethod.TRAPEZOID_PLUS_PARETO_TAIL, population_base, year)


def with_zero_income_bin(pid: BinnedPid, total_population: float) -> BinnedPid:
    """Prepend a zero-width bin holding everyone not in ``pid``."""
    missing = total_population - pid.total_count
    if missing < 0:
        raise PopulationUnderflow(
            f"total population {total_population} below counted {pid.total_count} in {pid.year}"
        )
    bins = pid.bins
    if bins and bins[0].lower == 0 and bins[0].upper == 0:
        first = replace(bins[0], count=bins[0].count + missing)
        bins = (first,) + bins[1:]
    else:
        bins = (Bin(0.0, 0.0, missing, 0.0),) + bins
    return BinnedPid(pid.year, bins, PopulationBase.ALL_15_PLUS, pid.income_units)


def rescale_income_axis(pid: BinnedPid, factor: float) -> BinnedPid:
    """Divide every income boundary and mean by ``factor``."""
    if not factor > 0:
        raise ValueError("factor must be positive")
    bins = tuple(
        Bin(
            b.lower / factor,
            None if b.upper is None else b.upper / factor,
            b.count,
            None if b.mean_income is None else b.mean_income / factor,
        )
        for b in pid.bins
    )
    return BinnedPid(pid.year, bins, pid.population_base, pid.income_units)


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class DensityTable:
    """Persons per unit income per person, bin by bin (closed bins only)."""

    year: int
    lower: np.ndarray
    upper: np.ndarray
    x: np.ndarray  # representative income (bin mean)
    density: np.ndarray


def normalize_density(
    pid: BinnedPid,
    population: float | None = None,
    correction: float = DEFAULT_CORRECTION,
) -> DensityTable:
    """count / (width * population) for closed, non-degenerate bins."""
    population = pid.total_count if population is None else population
    if not population > 0:
        raise ValueError("population must be positive")
    means = bin_means(pid, correction)
    rows = [(b.lower, b.upper, m, b.count / (b.width * population))
            for b, m in zip(pid.bins, means) if not b.is_open and b.width > 0]
    lo, hi, x, d = (np.array(c, float) for c in zip(*rows)) if rows else [np.empty(0)] * 4
    return DensityTable(pid.year, lo, hi, x, d)


def estimate_k_regression(
    table: DensityTable,
    threshold: float,
    convention: Convention = Convention.PAPER,
    min_bins: int = 3,
) -> tuple[float, float]:
    """(slope, k) from an unweighted fit of log density on log income over
    bins whose lower edge is at least ``threshold``."""
    keep = (table.lower >= threshold) & (table.density > 0)
    if keep.sum() < min_bins:
        raise InsufficientTailBins(f"{int(keep.sum())} bins above {threshold} in {table.year}, need {min_bins}")
    slope, _ = np.polyfit(np.log(table.x[keep]), np.log(table.density[keep]), 1)
    offset = 2.0 if convention is Convention.PAPER else 1.0
    return float(slope), float(abs(slope) - offset)


def fit_exponential(table: DensityTable, upper_limit: float, min_bins: int = 3) -> float:
    """Slope of log density against income over bins ending at or below
    ``upper_limit``; negative for a decaying density."""
    keep = (table.upper <= upper_limit) & (table.density > 0)
    if keep.sum() < min_bins:
        raise InsufficientBins(f"{int(keep.sum())} bins below {upper_limit}, need {min_bins}")
    slope, _ = np.polyfit(table.x[keep], np.log(table.density[keep]), 1)
    return float(slope)


def collapse_distance(a: DensityTable, b: DensityTable, points: int = 200) -> float:
    """Mean |log density difference| on a common log-income grid.

    Each density is interpolated linearly in (log x, log density) between
    its bin means; the grid spans only the overlap of the two supports.
    """
    def support(t):
        keep = (t.density > 0) & (t.x > 0)
        return np.log(t.x[keep]), np.log(t.density[keep])

    xa, ya = support(a)
    xb, yb = support(b)
    if xa.size < 2 or xb.size < 2:
        raise DisjointSupport("need two positive-density bins in each table")
    lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
    if not hi > lo:
        raise DisjointSupport("income supports do not overlap")
    grid = np.linspace(lo, hi, points)
    return float(np.mean(np.abs(np.interp(grid, xa, ya) - np.interp(grid, xb, yb))))


# ---------------------------------------------------------------------------
# series comparison


@dataclass(frozen=True)
class SeriesComparison:
    years: list[int]
    ours: np.ndarray
    reference: np.ndarray
    difference: np.ndarray  # ours - reference
    jump_year: int | None  # year of the largest |change| in the reference
    jump: float | None  # signed change into jump_year


def compare_series(ours: dict[int, float], reference: dict[int, float]) -> SeriesComparison:
    years = sorted(set(ours) & set(reference))
    if not years:
        raise NoOverlap("series share no years")
    o = np.array([ours[y] for y in years])
    r = np.array([reference[y] for y in years])
    jump_year = jump = None
    for y in sorted(reference):
        if y - 1 in reference:
            change = reference[y] - reference[y - 1]
            if jump is None or abs(change) > abs(jump):
                jump_year, jump = y, change
    return SeriesComparison(years, o, r, o - r, jump_year, jump)
