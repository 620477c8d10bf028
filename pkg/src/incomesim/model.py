"""Group-level income rates driven by real GDP per capita.

Incomes are in model units: the income a top group (s_rel = l_rel = 1) would
saturate at in the normalization year ``start_year``.  Within a calendar year
the rate equation

    dM/dt = (alpha / (Lmin * l)) * (Smin * Lmin * s * l - M)

is linear with frozen coefficients, so each year is advanced exactly.  After
the critical experience the earning capacity is zero and the income decays
exponentially with the year's decay index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .economy import EconomySeries, Law, growth_factor

GRID_MIN, GRID_MAX = 2, 30


class Convention(enum.Enum):
    """How a Pareto index ``k`` is read.

    PAPER: the published algebra, mean = (k+1) x_m / k, i.e. a tail whose
    survival function falls as x^-(k+1).  CONSISTENT: survival ~ x^-k, mean
    k x_m / (k-1).
    """

    PAPER = "paper"
    CONSISTENT = "consistent"


class DecayDivisor(enum.Enum):
    """Denominator of the post-critical decay exponent.

    L_ONLY: exp(-alpha_l dt / l), so the top group at age A keeps exactly C of
    its peak in any year.  LAMBDA_L: exp(-alpha_l dt / (Lmin l)), the same
    divisor as the growth phase.
    """

    L_ONLY = "l"
    LAMBDA_L = "lambda_l"


class DegenerateWindow(ValueError):
    pass


class EconomyTooShort(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    alpha: float = 0.086
    start_year: int = 1960
    alpha_year: int = 1960  # year in which alpha / Lmin == alpha
    c_decay: float = 0.72
    a_decay: float = 64.0
    tcr_anchor: tuple[int, float] = (2005, 55.0)  # (year, critical age)
    work_start_age: int = 15
    pareto_threshold_0: float = 0.43
    k_pareto: float = 1.35
    convention: Convention = Convention.PAPER
    boost: float | None = None  # None: the tail keeps its own Pareto mean
    unit_dollars: float = 120_000.0
    unit_year: int = 2000  # dollars of this year per model unit
    max_age: int = 100
    decay_divisor: DecayDivisor = DecayDivisor.L_ONLY
    pre_sample_growth: float | None = None  # None: earliest observed y/y factor

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.c_decay < 1:
            raise ValueError("c_decay must lie in (0, 1)")
        if not self.a_decay > self.tcr_anchor[1]:
            raise ValueError("a_decay must exceed the critical age")
        if not self.k_pareto > 1:
            raise ValueError("k must exceed 1")
        if self.boost is not None and self.boost < 1:
            raise ValueError("boost must be at least 1")
        if self.unit_dollars <= 0:
            raise ValueError("unit_dollars must be positive")
        if self.pre_sample_growth is not None and not self.pre_sample_growth > 0:
            raise ValueError("pre_sample_growth must be positive")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    @property
    def anchor_experience(self) -> float:
        return self.tcr_anchor[1] - self.work_start_age


@dataclass(frozen=True)
class CapabilityGrid:
    s_rel: np.ndarray
    l_rel: np.ndarray
    probability: np.ndarray

    def __len__(self):
        return len(self.s_rel)


def capability_grid() -> CapabilityGrid:
    """All 29 x 29 (S/30, L/30) pairs with S, L in 2..30, equally likely."""
    values = np.arange(GRID_MIN, GRID_MAX + 1) / GRID_MAX
    s, l = np.meshgrid(values, values, indexing="ij")
    n = s.size
    return CapabilityGrid(s.ravel(), l.ravel(), np.full(n, 1.0 / n))


@dataclass(frozen=True)
class ScaledParams:
    sigma_min: float
    lambda_min: float
    t_cr: float
    m_p: float


def scaled_params(params: ModelParams, economy: EconomySeries, year: int) -> ScaledParams:
    root = growth_factor(economy, params.start_year, year, Law.SQUARE_ROOT)
    anchor_year, _ = params.tcr_anchor
    return ScaledParams(
        sigma_min=root,
        lambda_min=root,
        t_cr=params.anchor_experience * growth_factor(economy, anchor_year, year, Law.SQUARE_ROOT),
        m_p=params.pareto_threshold_0 * growth_factor(economy, params.start_year, year, Law.LINEAR),
    )


def decay_index(c: float, a: float, t_cr: float, work_start_age: float = 15) -> float:
    """Per-year index that brings income at age ``a`` down to ``c`` of its peak."""
    window = (a - work_start_age) - t_cr
    if window <= 0:
        raise DegenerateWindow(f"age {a} leaves no decay window after critical experience {t_cr:.3f}")
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    return -math.log(c) / window


def closed_form_income(s_rel, l_rel, tau, alpha, lambda_min=1.0, sigma_min=1.0):
    """Income at experience ``tau`` with all coefficients frozen."""
    s_rel, l_rel, tau = np.asarray(s_rel, float), np.asarray(l_rel, float), np.asarray(tau, float)
    return sigma_min * lambda_min * s_rel * l_rel * -np.expm1(-alpha * tau / (lambda_min * l_rel))


def decayed_income(m_cr, l_rel, dt, alpha_l, lambda_min=1.0):
    """Income ``dt`` years past the critical experience, starting from ``m_cr``."""
    return np.asarray(m_cr, float) * np.exp(-alpha_l * np.asarray(dt, float) / (lambda_min * np.asarray(l_rel, float)))


def dollars_per_unit(params: ModelParams, economy: EconomySeries) -> float:
    """Constant ``unit_year`` dollars per model unit.

    ``unit_dollars`` is the saturation income of the top group in
    ``unit_year``; one model unit is that income in ``start_year``.
    """
    return params.unit_dollars / growth_factor(economy, params.start_year, params.unit_year, Law.LINEAR)


# ---------------------------------------------------------------------------
# year-by-year engine


@dataclass
class _YearCoefficients:
    target_scale: np.ndarray  # Smin * Lmin
    rate: np.ndarray  # alpha / Lmin
    lambda_min: np.ndarray
    t_cr: np.ndarray
    alpha_l: np.ndarray


def _coefficients(economy: EconomySeries, params: ModelParams) -> _YearCoefficients:
    gdp = economy.real_gdp_pc
    g0 = economy.real_gdp(params.start_year)
    root = np.sqrt(gdp / g0)
    alpha_0 = params.alpha * growth_factor(economy, params.start_year, params.alpha_year, Law.SQUARE_ROOT)
    anchor_year, _ = params.tcr_anchor
    t_cr = params.anchor_experience * np.sqrt(gdp / economy.real_gdp(anchor_year))
    window = (params.a_decay - params.work_start_age) - t_cr
    alpha_l = np.where(window > 0, -math.log(params.c_decay) / np.where(window > 0, window, 1.0), np.nan)
    return _YearCoefficients(root * root, alpha_0 / root, root, t_cr, alpha_l)


def _prepare_economy(economy: EconomySeries, params: ModelParams, first_birth: int) -> EconomySeries:
    needed = first_birth + params.work_start_age
    for year in (params.start_year, params.alpha_year, params.tcr_anchor[0]):
        economy.index(year)
    return economy.extended_back(min(needed, economy.first_year), params.pre_sample_growth)


@dataclass
class CohortIncomes:
    """Incomes of every (age, group) cell for a set of calendar years."""

    years: list[int]
    ages: np.ndarray
    grid: CapabilityGrid
    incomes: dict[int, np.ndarray] = field(repr=False)  # year -> (n_ages, n_groups)

    def at(self, year: int) -> np.ndarray:
        return self.incomes[year]


def _run(economy, params, births, grid, record_years):
    """Advance every cohort in ``births`` from its work start to the last
    recorded year.  Returns ({year: state copy}, crossover incomes, crossover
    experience); crossover entries are NaN for cohorts that never cross."""
    births = np.asarray(births, dtype=int)
    record_years = sorted(set(int(y) for y in record_years))
    last_year = record_years[-1]
    if last_year > economy.last_year:
        raise EconomyTooShort(f"economy ends in {economy.last_year}, need {last_year}")
    economy = _prepare_economy(economy, params, int(births.min()))
    coef = _coefficients(economy, params)
    first = economy.first_year
    start = births + params.work_start_age

    s = grid.s_rel[None, :]
    l = grid.l_rel[None, :]
    state = np.zeros((len(births), len(grid)))
    decaying = np.zeros(len(births), dtype=bool)
    m_cr = np.full(state.shape, np.nan)
    tau_cr = np.full(len(births), np.nan)
    wanted = set(record_years)
    out = {}
    for year in range(min(int(start.min()), record_years[0]), last_year + 1):
        if year in wanted:
            out[year] = state.copy()
        if year == last_year:
            break
        k = year - first
        tau = year - start
        active = tau >= 0
        t_cr = coef.t_cr[k]
        crossing = active & ~decaying & (tau + 1 > t_cr)
        grow_dt = np.where(crossing, np.clip(t_cr - tau, 0.0, 1.0), 1.0)
        grow_dt = np.where(active & ~decaying, grow_dt, 0.0)
        decay_dt = np.where(active & (decaying | crossing), 1.0 - grow_dt, 0.0)

        target = coef.target_scale[k] * s * l
        state = target + (state - target) * np.exp(-(coef.rate[k] / l) * grow_dt[:, None])
        if crossing.any():
            m_cr[crossing] = state[crossing]
            tau_cr[crossing] = tau[crossing] + grow_dt[crossing]
        if decay_dt.any() and np.isnan(coef.alpha_l[k]):
            raise DegenerateWindow(f"critical experience {t_cr:.3f} in {year} leaves no decay window")
        divisor = l if params.decay_divisor is DecayDivisor.L_ONLY else coef.lambda_min[k] * l
        state = state * np.exp(-(coef.alpha_l[k] / divisor) * decay_dt[:, None])
        decaying |= crossing
    return out, m_cr, tau_cr


def simulate(
    economy: EconomySeries,
    params: ModelParams,
    years,
    grid: CapabilityGrid | None = None,
    ages=None,
) -> CohortIncomes:
    """Income of every group of every cohort aged ``ages`` in each of ``years``.

    ``ages`` defaults to work_start_age..max_age.  The economy is
    back-extrapolated as needed to reach the oldest cohort's work start.
    """
    grid = capability_grid() if grid is None else grid
    years = sorted(int(y) for y in years)
    if ages is None:
        ages = np.arange(params.work_start_age, params.max_age + 1)
    ages = np.asarray(ages, dtype=int)
    if ages.min() < params.work_start_age:
        raise ValueError("ages below the work start age")
    for y in years:
        economy.index(y)
    births = np.unique(np.concatenate([y - ages for y in years]))
    states, _, _ = _run(economy, params, births, grid, years)
    row = {int(b): i for i, b in enumerate(births)}
    incomes = {y: states[y][[row[int(y - a)] for a in ages]] for y in years}
    return CohortIncomes(years, ages, grid, incomes)


@dataclass(frozen=True)
class IncomeTrajectory:
    s_rel: float
    l_rel: float
    birth_year: int
    income_by_year: dict[int, float]
    crossover: tuple[float, float] | None = None  # (experience, income) at T_cr

    @property
    def work_start(self) -> int:
        return min(self.income_by_year)


def trajectory(
    s_rel: float,
    l_rel: float,
    birth_year: int,
    economy: EconomySeries,
    params: ModelParams,
    last_year: int | None = None,
) -> IncomeTrajectory:
    """Income of one (s, l) group born in ``birth_year``, per calendar year."""
    work_start = birth_year + params.work_start_age
    last = economy.last_year if last_year is None else last_year
    if work_start > last or last > economy.last_year:
        raise EconomyTooShort(f"economy ({economy.first_year}-{economy.last_year}) does not cover "
                              f"cohort born {birth_year} through {last}")
    grid = CapabilityGrid(np.array([s_rel], float), np.array([l_rel], float), np.array([1.0]))
    years = range(work_start, last + 1)
    states, m_cr, tau_cr = _run(economy, params, [birth_year], grid, years)
    income = {y: float(states[y][0, 0]) for y in years}
    crossover = None if np.isnan(tau_cr[0]) else (float(tau_cr[0]), float(m_cr[0, 0]))
    return IncomeTrajectory(s_rel, l_rel, birth_year, income, crossover)
