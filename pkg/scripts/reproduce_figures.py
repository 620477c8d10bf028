"""Regenerate the figure tables (CSV) and rough SVG charts from the bundled data.

Outputs, all in --out:
  gini_series.csv/.svg    predicted G vs G estimated from the fine tables (both bases)
  gini_k.csv/.svg         predicted G for several tail indices
  resolution.csv          crude vs fine bin estimates for the years both cover
  k_estimates.csv         open-end and regression k for the extended 2005 table
  collapse.csv/.svg       distance of each crude-bin PID from 1947, raw and GPI-rescaled
  pid_model_2005.csv      model PID on $2500 bins next to the bundled 2005 counts

Run:  python3 scripts/reproduce_figures.py [--out figures] [--k 1.35]
"""

import argparse
import time
from pathlib import Path

import numpy as np

from incomesim.cli import data_dir, fmt, write_csv
from incomesim.economy import PopulationBase, load_age_structure, load_economy, load_pid_tables
from incomesim.inequality import (
    InsufficientTailBins,
    ParetoTail,
    bin_means,
    collapse_distance,
    estimate_k_open_end,
    estimate_k_regression,
    gini,
    lorenz_from_bins,
    normalize_density,
    rescale_income_axis,
    with_zero_income_bin,
)
from incomesim.model import Convention, ModelParams, dollars_per_unit
from incomesim.svg import line_chart
from incomesim.synth import (
    apply_pareto_zone,
    binned_model_pid,
    predicted_gini_series,
    simulate_for,
    synthesize_pid,
    threshold_dollars,
)


def tables(name):
    return {t.year: t for t in load_pid_tables(data_dir() / name) if t.population_base is PopulationBase.WITH_INCOME}


def empirical_gini(pid, economy, params, all_population=False):
    tail = ParetoTail(threshold_dollars(params, economy, pid.year, current=True), params.k_pareto, params.convention)
    if all_population:
        pid = with_zero_income_bin(pid, float(economy.pop_15plus[economy.index(pid.year)]))
    return gini(lorenz_from_bins(pid, bin_means(pid, tail=tail), tail)).value


def series_rows(series: dict[str, dict[int, float]]):
    years = sorted(set().union(*series.values()))
    return [[y] + [fmt(s[y]) if y in s else "" for s in series.values()] for y in years]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--k", type=float, default=1.35)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    economy = load_economy(data_dir() / "economy.csv")
    ages = load_age_structure(data_dir() / "ages.csv")
    params = ModelParams(k_pareto=args.k)
    years = list(range(1947, 2006))
    fine, crude = tables("pid_fine.csv"), tables("pid_crude.csv")

    t0 = time.perf_counter()
    predicted = predicted_gini_series(years, economy, ages, params)
    print(f"predicted series: {time.perf_counter() - t0:.1f} s, "
          f"G {min(predicted.values()):.4f}..{max(predicted.values()):.4f}")

    series = {
        "model": predicted,
        "fine, with income": {y: empirical_gini(fine[y], economy, params) for y in years if y in fine},
        "fine, all 15+": {y: empirical_gini(fine[y], economy, params, True) for y in years if y in fine},
    }
    write_csv(out / "gini_series.csv", ["year", "model", "fine_with_income", "fine_all_15plus"], series_rows(series))
    (out / "gini_series.svg").write_text(line_chart(series, "Gini coefficient", "year", "G"), encoding="utf-8")

    by_k = {f"k={k}": predicted_gini_series(years, economy, ages, params.with_(k_pareto=k)) for k in (1.2, 1.35, 1.5)}
    write_csv(out / "gini_k.csv", ["year"] + [s.replace("k=", "k_") for s in by_k], series_rows(by_k))
    (out / "gini_k.svg").write_text(line_chart(by_k, "Predicted G by tail index", "year", "G"), encoding="utf-8")

    rows = []
    for y in sorted(set(crude) & set(fine)):
        c, f = empirical_gini(crude[y], economy, params), empirical_gini(fine[y], economy, params)
        rows.append([y, fmt(c), fmt(f), fmt(f - c)])
    write_csv(out / "resolution.csv", ["year", "crude", "fine", "fine_minus_crude"], rows)
    print(f"resolution: fine minus crude {rows[0][3]} in {rows[0][0]}")

    ext = tables("pid_fine_extended.csv")[2005]
    rows = []
    for m in (100000.0, 250000.0):
        above = [b for b in ext.bins if b.lower >= m]
        n = sum(b.count for b in above)
        x_av = sum(b.count * b.mean_income for b in above) / n
        rows.append([2005, "open_end", fmt(m), "", fmt(estimate_k_open_end(m, x_av, Convention.PAPER))])
        try:
            slope, k = estimate_k_regression(normalize_density(ext), m, Convention.PAPER)
            rows.append([2005, "regression", fmt(m), fmt(slope), fmt(k)])
        except InsufficientTailBins:
            pass
    write_csv(out / "k_estimates.csv", ["year", "method", "threshold", "slope", "k"], rows)

    gpi = dict(zip(economy.years.tolist(), economy.nominal_gpi_pc_with_income))
    base = crude[1947]
    raw, resc = {}, {}
    for y in sorted(crude):
        if y == 1947:
            continue
        raw[y] = collapse_distance(normalize_density(base), normalize_density(crude[y]))
        resc[y] = collapse_distance(normalize_density(rescale_income_axis(base, gpi[1947])),
                                    normalize_density(rescale_income_axis(crude[y], gpi[y])))
    write_csv(out / "collapse.csv", ["year", "raw", "rescaled"], [[y, fmt(raw[y]), fmt(resc[y])] for y in raw])
    (out / "collapse.svg").write_text(
        line_chart({"raw": raw, "GPI-rescaled": resc}, "Distance from 1947", "year", "L1 distance"), encoding="utf-8")
    print(f"collapse: median raw/rescaled {np.median([raw[y] / resc[y] for y in raw]):.1f}x")

    incomes = simulate_for([2005], economy, ages, params)
    zoned = apply_pareto_zone(synthesize_pid(2005, economy, ages, params, incomes), args.k)
    model = binned_model_pid(zoned, dollars_per_unit(params, economy))
    rows = [[fmt(b.lower), "" if b.upper is None else fmt(b.upper), fmt(b.count)] for b in model.bins]
    write_csv(out / "pid_model_2005.csv", ["lower", "upper", "count"], rows)
    print(f"wrote figure tables to {out}")


if __name__ == "__main__":
    main()
