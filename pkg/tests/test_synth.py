import numpy as np
import pytest

from conftest import flat_economy, single_age
from incomesim.model import ModelParams
from incomesim.synth import (
    EmptyTail,
    MissingAgeCounts,
    ModelPid,
    apply_pareto_zone,
    binned_model_pid,
    exact_gini,
    extra_income_ratio,
    gini_sensitivity,
    predicted_gini,
    predicted_gini_series,
    simulate_for,
    synthesize_pid,
    threshold_dollars,
)
from oracles import gini_pairwise

P = ModelParams()


@pytest.fixture(scope="module")
def incomes(economy, ages):
    return simulate_for(range(1947, 2006), economy, ages, P)


@pytest.fixture(scope="module")
def pid2005(economy, ages, incomes):
    return synthesize_pid(2005, economy, ages, P, incomes)


def test_weights_conserve_population(economy, ages, incomes):
    for year in (1947, 1975, 2005):
        pid = synthesize_pid(year, economy, ages, P, incomes)
        assert pid.population == pytest.approx(economy.pop_15plus[economy.index(year)], rel=1e-9)
        assert np.all(pid.weights >= 0)
        zoned = apply_pareto_zone(pid, 1.35)
        assert zoned.population == pytest.approx(pid.population, rel=1e-12)


def test_single_cohort_has_841_values():
    e = flat_economy()
    pid = synthesize_pid(1990, e, single_age([1990]), P)
    assert pid.incomes.size == 841
    assert np.unique(pid.incomes).size == 841


def test_missing_age_counts(economy):
    with pytest.raises(MissingAgeCounts):
        synthesize_pid(1990, economy, single_age([1989]), P)


def test_threshold_2005_in_published_band(economy):
    assert 40000 <= threshold_dollars(P, economy, 2005) <= 60000


def test_pareto_zone_headcount_and_boost(pid2005):
    z = apply_pareto_zone(pid2005, 1.35, boost=1.33)
    assert z.tail_count == pytest.approx(pid2005.tail_count, rel=0)
    assert z.tail_income == pytest.approx(1.33 * pid2005.tail_income, rel=1e-15)
    assert z.tail_income_factor == pytest.approx(1.33)
    below = pid2005.incomes[~pid2005.tail_mask]
    np.testing.assert_array_equal(np.sort(below), z.below_incomes)


def test_large_k_tail_collapses_to_threshold(pid2005):
    z = apply_pareto_zone(pid2005, 1e9)
    assert z.tail_income == pytest.approx(pid2005.tail_count * pid2005.threshold, rel=1e-8)
    ratio = extra_income_ratio(1e9, pid2005)
    assert ratio == pytest.approx(pid2005.tail_count * pid2005.threshold / pid2005.tail_income, rel=1e-8)


def test_tail_share_2005_about_ten_percent(pid2005):
    # published: "about ten per cent of the population"; see ledger for the value reached
    assert pid2005.tail_count / pid2005.population == pytest.approx(0.10, abs=0.05)


def test_extra_income_ratio_decreasing(pid2005):
    ks = np.linspace(1.1, 3.0, 40)
    r = [extra_income_ratio(k, pid2005) for k in ks]
    assert np.all(np.diff(r) < 0)


def test_empty_tail_flagged():
    pid = ModelPid(2000, np.array([0.1, 0.2]), np.array([1.0, 1.0]), threshold=5.0)
    z = apply_pareto_zone(pid, 1.35)
    assert z.empty_tail and z.tail_count == 0
    assert exact_gini(z).value == pytest.approx(gini_pairwise([0.1, 0.2]))
    with pytest.raises(EmptyTail):
        extra_income_ratio(1.35, pid)


def test_exact_gini_against_quantile_oracle():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 1, 300)
    w = rng.uniform(0.5, 2, 300)
    pid = ModelPid(2000, x, w, threshold=0.8)
    z = apply_pareto_zone(pid, 1.5)
    # replace the analytic tail by 4000 equal-weight quantile points
    n = 4000
    a = z.tail.exponent
    u = (np.arange(n) + 0.5) / n
    q = z.tail.x_m * (1 - u) ** (-1 / a)
    q *= z.tail_income / (z.tail_count * q.mean())
    xs = np.r_[z.below_incomes, q]
    ws = np.r_[z.below_weights, np.full(n, z.tail_count / n)]
    assert exact_gini(z).value == pytest.approx(gini_pairwise(xs, ws), abs=2e-3)


def test_sensitivity(economy, ages):
    rows = gini_sensitivity(2005, [1.2, 1.35, 1.5, 2.0], economy, ages, P)
    g = [v for _, v in rows]
    assert np.all(np.diff(g) < 0)
    # published: 0.3 units of k moves G by 0.01 to 0.015
    assert 0.01 <= g[0] - g[2] <= 0.015
    single = gini_sensitivity(2005, [1.35], economy, ages, P)
    assert single[0][1] == pytest.approx(predicted_gini(2005, economy, ages, P).value, rel=1e-12)


def test_unit_dollars_do_not_move_gini(economy, ages, incomes):
    a = predicted_gini(1980, economy, ages, P, incomes).value
    b = predicted_gini(1980, economy, ages, P.with_(unit_dollars=1.0), incomes).value
    assert a == b


def test_start_year_does_not_move_gini(economy, ages):
    a = predicted_gini_series([1950, 1990], economy, ages, P)
    b = predicted_gini_series([1950, 1990], economy, ages, P.with_(start_year=1947))
    for y in a:
        assert a[y] == pytest.approx(b[y], rel=1e-10)


def test_removing_boost_lowers_gini(economy, ages, incomes):
    for year in range(1947, 2006, 2):
        pid = synthesize_pid(year, economy, ages, P, incomes)
        with_tail = exact_gini(apply_pareto_zone(pid, 1.35)).value
        flat = exact_gini(apply_pareto_zone(pid, 1.35, boost=1.0)).value
        assert flat < with_tail


def test_binned_model_pid_preserves_totals(pid2005, economy):
    from incomesim.model import dollars_per_unit

    z = apply_pareto_zone(pid2005, 1.35)
    d = dollars_per_unit(P, economy)
    b = binned_model_pid(z, d)
    assert b.total_count == pytest.approx(z.population, rel=1e-9)
    income = sum(x.count * x.mean_income for x in b.bins if x.mean_income is not None)
    assert income == pytest.approx(z.total_income * d, rel=1e-9)
    assert b.open_bin.lower == pytest.approx(threshold_dollars(P, economy, 2005))
