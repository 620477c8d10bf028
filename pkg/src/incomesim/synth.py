"""Model income distributions: weight group incomes by age counts, graft a
Pareto tail above the threshold, and compute the Gini coefficient exactly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .economy import AgeStructure, Bin, BinnedPid, DataError, EconomySeries, IncomeUnits, PopulationBase
from .inequality import GiniEstimate, GiniMethod, LorenzCurve, ParetoTail
from .model import CohortIncomes, Convention, ModelParams, dollars_per_unit, scaled_params, simulate


class MissingAgeCounts(DataError):
    pass


class EmptyTail(ValueError):
    pass


@dataclass(frozen=True)
class ModelPid:
    """Weighted group incomes (model units) for one year."""

    year: int
    incomes: np.ndarray
    weights: np.ndarray  # persons; sums to the year's population aged 15+
    threshold: float

    @property
    def population(self) -> float:
        return float(self.weights.sum())

    @property
    def tail_mask(self) -> np.ndarray:
        return self.incomes > self.threshold

    @property
    def tail_count(self) -> float:
        return float(self.weights[self.tail_mask].sum())

    @property
    def tail_income(self) -> float:
        """Theoretical income of everyone above the threshold."""
        m = self.tail_mask
        return float(np.dot(self.incomes[m], self.weights[m]))


@dataclass(frozen=True)
class ZonedDistribution:
    """Exact incomes below the threshold, an analytic Pareto tail above."""

    year: int
    below_incomes: np.ndarray  # sorted ascending
    below_weights: np.ndarray
    tail: ParetoTail
    tail_count: float
    tail_income: float
    theoretical_tail_income: float
    empty_tail: bool

    @property
    def population(self) -> float:
        return float(self.below_weights.sum()) + self.tail_count

    @property
    def total_income(self) -> float:
        return float(np.dot(self.below_incomes, self.below_weights)) + self.tail_income

    @property
    def tail_income_factor(self) -> float:
        if self.empty_tail:
            return 1.0
        return self.tail_income / self.theoretical_tail_income


def _age_counts(ages: AgeStructure, year: int, params: ModelParams):
    if year not in ages.table:
        raise MissingAgeCounts(f"no age counts for year {year}")
    a, c = ages.counts(year)
    if a[0] < params.work_start_age:
        raise MissingAgeCounts(f"age counts below the work start age in {year}")
    return a, c


def simulate_for(years, economy: EconomySeries, ages: AgeStructure, params: ModelParams) -> CohortIncomes:
    """One simulation covering every age present in ``ages`` for ``years``."""
    years = sorted(int(y) for y in years)
    top = max(int(_age_counts(ages, y, params)[0][-1]) for y in years)
    return simulate(economy, params, years, ages=np.arange(params.work_start_age, top + 1))


def synthesize_pid(
    year: int,
    economy: EconomySeries,
    ages: AgeStructure,
    params: ModelParams,
    incomes: CohortIncomes | None = None,
) -> ModelPid:
    """Every (age, group) cell with weight count(age)/841 and its income."""
    a, c = _age_counts(ages, year, params)
    if incomes is None:
        incomes = simulate(economy, params, [year], ages=a)
    table = incomes.at(year)
    rows = a - incomes.ages[0]
    n_groups = table.shape[1]
    weights = np.repeat(c[:, None] / n_groups, n_groups, axis=1)
    return ModelPid(
        year=year,
        incomes=table[rows].ravel(),
        weights=weights.ravel(),
        threshold=scaled_params(params, economy, year).m_p,
    )


def apply_pareto_zone(pid: ModelPid, k: float, boost: float | None = None, convention=None) -> ZonedDistribution:
    """Replace incomes above the threshold by a Pareto tail of index ``k``.

    Headcount above the threshold is kept.  With ``boost=None`` the tail
    carries its own Pareto mean; otherwise its total is ``boost`` times the
    theoretical income it replaces.  An empty tail is flagged, not raised.
    """
    convention = Convention.PAPER if convention is None else convention
    if not k > 1:
        raise ValueError("k must exceed 1")
    tail = ParetoTail(pid.threshold, k, convention)
    m = pid.tail_mask
    order = np.argsort(pid.incomes[~m], kind="stable")
    below_x = pid.incomes[~m][order]
    below_w = pid.weights[~m][order]
    count = pid.tail_count
    theoretical = pid.tail_income
    empty = not count > 0
    if empty:
        income = 0.0
    elif boost is None:
        income = count * tail.mean
    else:
        income = boost * theoretical
    return ZonedDistribution(pid.year, below_x, below_w, tail, count, income, theoretical, empty)


def extra_income_ratio(k: float, pid: ModelPid, convention=None) -> float:
    """Pareto-tail income over the theoretical income it replaces."""
    zoned = apply_pareto_zone(pid, k, None, convention)
    if zoned.empty_tail:
        raise EmptyTail(f"no model income above the threshold in {pid.year}")
    return zoned.tail_income_factor


def zoned_lorenz(zoned: ZonedDistribution) -> LorenzCurve:
    n, total = zoned.population, zoned.total_income
    x = np.concatenate([[0.0], np.cumsum(zoned.below_weights) / n])
    y = np.concatenate([[0.0], np.cumsum(zoned.below_incomes * zoned.below_weights) / total])
    if zoned.empty_tail:
        x[-1] = y[-1] = 1.0
        return LorenzCurve(x, y)
    return LorenzCurve(np.append(x, 1.0), np.append(y, 1.0), zoned.tail.exponent)


def exact_gini(zoned: ZonedDistribution) -> GiniEstimate:
    value = 1.0 - 2.0 * zoned_lorenz(zoned).area()
    return GiniEstimate(value, GiniMethod.EXACT_MODEL, PopulationBase.ALL_15_PLUS, zoned.year)


def predicted_gini(
    year: int,
    economy: EconomySeries,
    ages: AgeStructure,
    params: ModelParams,
    incomes: CohortIncomes | None = None,
) -> GiniEstimate:
    pid = synthesize_pid(year, economy, ages, params, incomes)
    return exact_gini(apply_pareto_zone(pid, params.k_pareto, params.boost, params.convention))


def predicted_gini_series(years, economy: EconomySeries, ages: AgeStructure, params: ModelParams) -> dict[int, float]:
    incomes = simulate_for(years, economy, ages, params)
    return {y: predicted_gini(y, economy, ages, params, incomes).value for y in incomes.years}


def gini_sensitivity(year: int, k_values, economy: EconomySeries, ages: AgeStructure, params: ModelParams):
    """[(k, G)] with everything but k fixed; trajectories do not depend on k."""
    k_values = [float(k) for k in k_values]
    if any(not k > 1 for k in k_values):
        raise ValueError("k must exceed 1")
    pid = synthesize_pid(year, economy, ages, params, simulate_for([year], economy, ages, params))
    return [(k, exact_gini(apply_pareto_zone(pid, k, params.boost, params.convention)).value) for k in k_values]


def threshold_dollars(params: ModelParams, economy: EconomySeries, year: int, current: bool = False) -> float:
    """Pareto threshold in constant ``unit_year`` dollars, or current dollars."""
    value = scaled_params(params, economy, year).m_p * dollars_per_unit(params, economy)
    if current:
        value *= _deflator(economy, year) / _deflator(economy, params.unit_year)
    return value


def _deflator(economy: EconomySeries, year: int) -> float:
    i = economy.index(year)
    return float(economy.nominal_gdp_pc[i] / economy.real_gdp_pc[i])


def binned_model_pid(zoned: ZonedDistribution, dollars: float, width: float = 2500.0) -> BinnedPid:
    """Bin the zoned distribution in dollars: ``width`` bins up to the
    threshold (last one truncated) and an open bin for the tail."""
    x = zoned.below_incomes * dollars
    w = zoned.below_weights
    threshold = zoned.tail.x_m * dollars
    edges = np.arange(0.0, threshold, width)
    edges = np.append(edges, threshold)
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(edges) - 2)
    counts = np.bincount(idx, weights=w, minlength=len(edges) - 1)
    sums = np.bincount(idx, weights=w * x, minlength=len(edges) - 1)
    bins = []
    for i, (n, s) in enumerate(zip(counts, sums)):
        mean = None
        if n > 0:
            mean = min(max(s / n, edges[i]), edges[i + 1])
        bins.append(Bin(float(edges[i]), float(edges[i + 1]), float(n), mean))
    tail_mean = None if zoned.empty_tail else zoned.tail_income * dollars / zoned.tail_count
    bins.append(Bin(float(threshold), None, zoned.tail_count, tail_mean))
    return BinnedPid(zoned.year, tuple(bins), PopulationBase.ALL_15_PLUS, IncomeUnits.CONSTANT_DOLLARS)
