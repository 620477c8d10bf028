"""incomesim command line: simulate, gini, fit-pareto, collapse, compare."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .economy import (
    BinnedPid,
    EconomySeries,
    PopulationBase,
    dump_pid_tables,
    load_age_structure,
    load_economy,
    load_pid_tables,
)
from .inequality import (
    DEFAULT_CORRECTION,
    InsufficientTailBins,
    ParetoTail,
    bin_means,
    collapse_distance,
    compare_series,
    estimate_k_open_end,
    estimate_k_regression,
    gini,
    gini_trapezoid,
    lorenz_from_bins,
    normalize_density,
    rescale_income_axis,
    with_zero_income_bin,
)
from .model import Convention, ModelParams, dollars_per_unit
from .svg import line_chart
from .synth import (
    apply_pareto_zone,
    binned_model_pid,
    exact_gini,
    gini_sensitivity,
    simulate_for,
    synthesize_pid,
    threshold_dollars,
)

class UsageError(ValueError):
    pass


def data_dir() -> Path:
    env = os.environ.get("INCOMESIM_DATA")
    if env:
        return Path(env)
    return Path(str(resources.files("incomesim") / "data"))


def fmt(v: float) -> str:
    return f"{v:.6f}"


def write_csv(path: Path, header, rows):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(out.getvalue(), encoding="utf-8")


def pool_map(fn, items, jobs: int):
    """map() over a process pool; results come back in input order."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


@dataclass
class RunConfig:
    command: str
    economy: Path
    ages: Path
    pid: Path
    first: int | None
    last: int | None
    out: Path
    jobs: int
    params: ModelParams
    correction: float
    args: argparse.Namespace


def year_range(cfg: RunConfig, available) -> list[int]:
    available = sorted(set(int(y) for y in available))
    if not available:
        raise UsageError("no years available")
    first = available[0] if cfg.first is None else cfg.first
    last = available[-1] if cfg.last is None else cfg.last
    if first > last:
        raise UsageError(f"--from {first} is after --to {last}")
    if first < available[0] or last > available[-1]:
        raise UsageError(f"years {first}-{last} outside data range {available[0]}-{available[-1]}")
    years = [y for y in available if first <= y <= last]
    missing = sorted(set(range(first, last + 1)) - set(years))
    if missing:
        raise UsageError(f"no data for year {missing[0]}")
    return years


def load_tables(path: Path, base=PopulationBase.WITH_INCOME) -> dict[int, BinnedPid]:
    return {t.year: t for t in load_pid_tables(path) if t.population_base is base}


# ---------------------------------------------------------------------------
# simulate


def _zone_and_bin(task):
    pid, params, dollars = task
    zoned = apply_pareto_zone(pid, params.k_pareto, params.boost, params.convention)
    return exact_gini(zoned).value, dump_pid_tables([binned_model_pid(zoned, dollars)], fmt)


def run_simulate(cfg: RunConfig) -> int:
    economy = load_economy(cfg.economy)
    ages = load_age_structure(cfg.ages)
    years = year_range(cfg, set(economy.years.tolist()) & set(ages.years))
    params = cfg.params
    incomes = simulate_for(years, economy, ages, params)
    dollars = dollars_per_unit(params, economy)
    tasks = [(synthesize_pid(y, economy, ages, params, incomes), params, dollars) for y in years]
    results = pool_map(_zone_and_bin, tasks, cfg.jobs)
    write_csv(cfg.out / "gini_predicted.csv", ["year", "gini"], [[y, fmt(g)] for y, (g, _) in zip(years, results)])
    for y, (_, text) in zip(years, results):
        (cfg.out / f"pid_model_{y}.csv").write_text(text, encoding="utf-8")
    a = cfg.args
    if a.sensitivity:
        year = a.sensitivity_year if a.sensitivity_year is not None else years[-1]
        ks = [float(k) for k in a.sensitivity.split(",")]
        rows = gini_sensitivity(year, ks, economy, ages, params)
        write_csv(cfg.out / "sensitivity.csv", ["k", "gini"], [[fmt(k), fmt(g)] for k, g in rows])
    if a.svg:
        series = {"predicted": {y: g for y, (g, _) in zip(years, results)}}
        if a.empirical:
            for label, s in read_gini_series(Path(a.empirical)).items():
                series[label] = s
        (cfg.out / "fig17.svg").write_text(
            line_chart(series, "Gini coefficient", "year", "G"), encoding="utf-8")
    print(f"simulated {years[0]}-{years[-1]}: wrote gini_predicted.csv and {len(years)} model PIDs to {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# gini


@dataclass(frozen=True)
class _GiniTask:
    pid: BinnedPid
    total_pop: float | None
    correction: float
    tail: ParetoTail | None


def _gini_rows(task: _GiniTask):
    """[(base, method, G, lorenz points)] for one year."""
    pids = [task.pid]
    if task.total_pop is not None:
        pids.append(with_zero_income_bin(task.pid, task.total_pop))
    rows = []
    for pid in pids:
        if task.tail is None:
            curve = lorenz_from_bins(pid, bin_means(pid, task.correction))
            est = gini_trapezoid(curve)
        else:
            curve = lorenz_from_bins(pid, bin_means(pid, task.correction, task.tail), task.tail)
            est = gini(curve)
        rows.append((pid.population_base, est.method, est.value, curve))
    return rows


def run_gini(cfg: RunConfig) -> int:
    a = cfg.args
    tables = load_tables(cfg.pid)
    years = year_range(cfg, tables)
    economy = None
    if a.all_population or a.tail_k is not None:
        economy = load_economy(cfg.economy)
    tasks = []
    for y in years:
        tail = None
        if a.tail_k is not None:
            tail = ParetoTail(threshold_dollars(cfg.params, economy, y, current=True), a.tail_k, cfg.params.convention)
        total = float(economy.pop_15plus[economy.index(y)]) if a.all_population else None
        tasks.append(_GiniTask(tables[y], total, cfg.correction, tail))
    results = pool_map(_gini_rows, tasks, cfg.jobs)
    rows = []
    for y, year_rows in zip(years, results):
        for base, method, value, _ in year_rows:
            rows.append([y, base.value, method.value, fmt(value)])
        curve = year_rows[0][3]
        write_csv(cfg.out / f"lorenz_{y}.csv", ["x", "y"], [[fmt(x), fmt(v)] for x, v in zip(curve.x, curve.y)])
    write_csv(cfg.out / "gini_empirical.csv", ["year", "population_base", "method", "gini"], rows)
    print(f"estimated Gini for {years[0]}-{years[-1]}: wrote gini_empirical.csv to {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# fit-pareto


def _k_rows(task):
    pid, minima, convention, correction = task
    rows = []
    for m in minima:
        above = [b for b in pid.bins if b.lower >= m]
        if above and all(b.mean_income is not None for b in above):
            n = sum(b.count for b in above)
            if n > 0:
                x_av = sum(b.count * b.mean_income for b in above) / n
                rows.append((pid.year, "open_end", m, None, estimate_k_open_end(m, x_av, convention)))
        try:
            slope, k = estimate_k_regression(normalize_density(pid, correction=correction), m, convention)
        except InsufficientTailBins:
            continue
        rows.append((pid.year, "regression", m, slope, k))
    return rows


def run_fit_pareto(cfg: RunConfig) -> int:
    a = cfg.args
    tables = load_tables(cfg.pid)
    years = year_range(cfg, tables)
    minima = [float(m) for m in a.min.split(",")]
    tasks = [(tables[y], minima, cfg.params.convention, cfg.correction) for y in years]
    rows = [r for rs in pool_map(_k_rows, tasks, cfg.jobs) for r in rs]
    if not rows:
        raise UsageError(f"no year has bin means or three closed bins above {a.min}")
    write_csv(cfg.out / "k_estimates.csv", ["year", "method", "threshold", "slope", "k"],
              [[y, m, fmt(t), "" if s is None else fmt(s), fmt(k)] for y, m, t, s, k in rows])
    print(f"wrote {len(rows)} Pareto index estimates to {cfg.out / 'k_estimates.csv'}")
    return 0


# ---------------------------------------------------------------------------
# collapse


def _density(pid: BinnedPid, economy: EconomySeries | None, correction: float):
    if economy is not None:
        pid = rescale_income_axis(pid, float(economy.nominal_gpi_pc_with_income[economy.index(pid.year)]))
    return normalize_density(pid, correction=correction)


def _distance(task):
    a, b, economy, correction = task
    return collapse_distance(_density(a, economy, correction), _density(b, economy, correction))


def run_collapse(cfg: RunConfig) -> int:
    a = cfg.args
    first = load_tables(cfg.pid)
    economy = None if a.raw else load_economy(cfg.economy)
    if a.pid_b:
        second = load_tables(Path(a.pid_b))
        years = year_range(cfg, set(first) & set(second))
        pairs = [(first[y], second[y]) for y in years]
    else:
        years = year_range(cfg, first)
        pairs = [(first[years[0]], first[y]) for y in years]
    dists = pool_map(_distance, [(p, q, economy, cfg.correction) for p, q in pairs], cfg.jobs)
    write_csv(cfg.out / "collapse.csv", ["year_a", "year_b", "distance"],
              [[p.year, q.year, fmt(d)] for (p, q), d in zip(pairs, dists)])
    print(f"wrote {len(pairs)} collapse distances to {cfg.out / 'collapse.csv'}")
    return 0


# ---------------------------------------------------------------------------
# compare


def read_gini_series(path: Path, base: str | None = None, method: str | None = None) -> dict[str, dict[int, float]]:
    """Series keyed by label from a `year,gini` file or a gini_empirical file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "year" not in fields or "gini" not in fields:
            raise UsageError(f"{path}: needs year and gini columns")
        out: dict[str, dict[int, float]] = {}
        for row in reader:
            parts = [row[c] for c in ("population_base", "method") if c in fields]
            if base is not None and "population_base" in fields and row["population_base"] != base:
                continue
            if method is not None and "method" in fields and row["method"] != method:
                continue
            label = " ".join(parts) if parts else path.stem
            try:
                out.setdefault(label, {})[int(row["year"])] = float(row["gini"])
            except ValueError:
                raise UsageError(f"{path}, line {reader.line_num}: bad year or gini value") from None
    return out


def _single(path: Path, base, method) -> dict[int, float]:
    series = read_gini_series(path, base, method)
    if not series:
        raise UsageError(f"{path}: no rows match")
    return next(iter(series.values()))


def run_compare(cfg: RunConfig) -> int:
    a = cfg.args
    if not a.ours or not a.reference:
        raise UsageError("compare needs --ours and --reference")
    ours = _single(Path(a.ours), a.base, a.method)
    ref = _single(Path(a.reference), a.base, a.method)
    cmp = compare_series(ours, ref)
    rows = []
    for y, o, r, d in zip(cmp.years, cmp.ours, cmp.reference, cmp.difference):
        change = "" if y - 1 not in ref else fmt(ref[y] - ref[y - 1])
        rows.append([y, fmt(o), fmt(r), fmt(d), change, int(y == cmp.jump_year)])
    write_csv(cfg.out / "comparison.csv",
              ["year", "ours", "reference", "difference", "reference_change", "largest_jump"], rows)
    if cmp.jump_year is not None:
        print(f"largest reference jump: {cmp.jump:+.6f} into {cmp.jump_year}")
    return 0


RUNNERS = {
    "simulate": run_simulate,
    "gini": run_gini,
    "fit-pareto": run_fit_pareto,
    "collapse": run_collapse,
    "compare": run_compare,
}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--economy", help="economy CSV (default: <data>/economy.csv)")
    common.add_argument("--ages", help="ages CSV (default: <data>/ages.csv)")
    common.add_argument("--pid", help="binned PID CSV (default: <data>/pid_fine.csv)")
    common.add_argument("--from", dest="first", type=int, help="first year")
    common.add_argument("--to", dest="last", type=int, help="last year")
    common.add_argument("--k", type=float, default=1.35, help="Pareto index of the model tail")
    common.add_argument("--alpha", type=float, default=0.086)
    common.add_argument("--boost", type=float, default=None,
                        help="scale the tail total to BOOST x theoretical (default: Pareto mean)")
    common.add_argument("--correction", type=float, default=DEFAULT_CORRECTION,
                        help="bin-mean offset in bin widths when no mean is reported")
    common.add_argument("--convention", choices=[c.value for c in Convention], default="paper")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out", default=".", help="output directory")

    p = argparse.ArgumentParser(prog="incomesim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="predicted Gini series and model PIDs")
    s.add_argument("--svg", action="store_true", help="also write fig17.svg")
    s.add_argument("--empirical", help="Gini CSV to overlay on the SVG")
    s.add_argument("--sensitivity", help="comma-separated k values; writes sensitivity.csv")
    s.add_argument("--sensitivity-year", type=int)

    g = sub.add_parser("gini", parents=[common], help="Gini of binned PIDs")
    g.add_argument("--all-population", action="store_true", help="also the zero-income augmented base")
    g.add_argument("--tail-k", type=float, help="Pareto means above the model threshold with this k")

    f = sub.add_parser("fit-pareto", parents=[common], help="Pareto index estimates")
    f.add_argument("--min", default="100000", help="comma-separated income thresholds")

    c = sub.add_parser("collapse", parents=[common], help="distances between normalized densities")
    c.add_argument("--pid-b", help="second PID file; compares the same year in both")
    c.add_argument("--raw", action="store_true", help="skip the GPI rescaling")

    m = sub.add_parser("compare", parents=[common], help="compare two Gini series")
    m.add_argument("--ours", help="year,gini CSV")
    m.add_argument("--reference", help="year,gini CSV")
    m.add_argument("--base", default=None, help="population_base filter")
    m.add_argument("--method", default=None, help="method filter")
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    root = data_dir()
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    params = ModelParams(
        alpha=args.alpha,
        k_pareto=args.k,
        boost=args.boost,
        convention=Convention(args.convention),
    )
    if getattr(args, "tail_k", None) is not None and not args.tail_k > 1:
        raise UsageError("k must exceed 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return RunConfig(
        command=args.command,
        economy=Path(args.economy) if args.economy else root / "economy.csv",
        ages=Path(args.ages) if args.ages else root / "ages.csv",
        pid=Path(args.pid) if args.pid else root / "pid_fine.csv",
        first=args.first,
        last=args.last,
        out=out,
        jobs=args.jobs,
        params=params,
        correction=args.correction,
        args=args,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        return RUNNERS[cfg.command](cfg)
    except (ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"incomesim {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
