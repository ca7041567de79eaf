"""Seeded benchmark suites: fitness, robustness, timing and near-Kronecker.

A suite expands into cells ``(size, density, sigma, frac)``; each repetition
of a cell draws one dataset and evaluates every requested model on it, so
models are compared on identical data. Repetition ``i`` always uses random
stream ``(seed, i)``.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path

import numpy as np

from .errors import KgcrfError, TooFewRecordsError
from .gcrf import FitOptions, build_problem, fit, mse, predict
from .graph import edge_density
from .nkp import kron_residual, nearest_kron, sparsify_factors
from .randnet import GRAPH_TYPES, RngStream
from .spectral import PAIRINGS, exact_basis, exact_kron_basis, factored_basis
from .synthdata import DEFAULT_SIGMA1, gen_dataset, gen_nkp_dataset

SUITES = ("fitness", "robustness", "timing", "nkp")
MODELS = ("base", "base_svd", "laplace_vec", "norm_laplace_vec", "msn")
# Debug model: GCRF with beta fixed at 0, i.e. the unstructured predictor.
SMOKE_MODEL = "beta0"
APPROX_MODELS = ("laplace_vec", "norm_laplace_vec", "msn")

DEFAULTS = {
    "fitness": dict(sizes=[(30, 50)], densities=[0.1, 0.3, 0.5, 0.65, 0.8], noises=[DEFAULT_SIGMA1]),
    "robustness": dict(sizes=[(30, 50)], densities=[0.5], noises=[0.0, 0.25, 0.33, 0.5]),
    "timing": dict(sizes=[(30, 50), (50, 100), (100, 200)], densities=[0.3], noises=[DEFAULT_SIGMA1]),
    "nkp": dict(sizes=[(30, 50)], densities=[0.1, 0.2, 0.3], noises=[DEFAULT_SIGMA1]),
}
DEFAULT_NKP_NOISES = [0.0, 0.05, 0.1, 0.15, 0.2, 0.4, 0.6]
TIMING_SIGMA = DEFAULT_SIGMA1


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    graph_type: str = "er"
    sizes: tuple = ((30, 50),)
    densities: tuple = (0.1,)
    output_noises: tuple = (DEFAULT_SIGMA1,)
    nkp_noises: tuple = (0.0,)
    models: tuple = ("base", "laplace_vec", "norm_laplace_vec", "msn")
    reps: int = 100
    base_seed: int = 0
    pairing_mode: str = "sorted"
    workers: int = 1
    fit_options: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.graph_type not in GRAPH_TYPES:
            raise ValueError(f"unknown graph type {self.graph_type!r}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not self.sizes:
            raise ValueError("sizes must be nonempty")
        for n1, n2 in self.sizes:
            if n1 < 3 or n2 < 3:
                raise ValueError(f"size {n1}x{n2} too small")
        if any(not 0 < r <= 1 for r in self.densities):
            raise ValueError("densities must lie in (0, 1]")
        if any(not 0 <= f <= 1 for f in self.nkp_noises):
            raise ValueError("added-edge fractions must lie in [0, 1]")
        if any(s < 0 for s in self.output_noises):
            raise ValueError("noise levels must be nonnegative")
        bad = set(self.models) - set(MODELS) - {SMOKE_MODEL}
        if bad:
            raise ValueError(f"unknown models {sorted(bad)}")
        if "base_svd" in self.models and self.suite != "nkp":
            raise ValueError("base_svd only applies to the nkp suite")
        if self.pairing_mode not in PAIRINGS:
            raise ValueError(f"unknown pairing {self.pairing_mode!r}")


@dataclass(frozen=True)
class RunRecord:
    suite: str
    graph_type: str
    n1: int
    n2: int
    rho1: float
    rho2: float
    sigma: float
    nkp_noise: float
    model: str
    rep: int
    seed: int
    mse: float | None
    runtime_s: float
    iterations: int
    failed: bool = False
    error: str = ""
    resid_pre: float | None = None
    resid_post: float | None = None

    @property
    def cell(self) -> tuple:
        return (self.suite, self.graph_type, self.n1, self.n2, self.rho1, self.rho2,
                self.sigma, self.nkp_noise, self.model)


RECORD_FIELDS = [f.name for f in dataclasses.fields(RunRecord)]
CELL_FIELDS = RECORD_FIELDS[:9]


# -- aggregation ---------------------------------------------------------

@dataclass(frozen=True)
class CellSummary:
    trimmed_mse: float
    ci_low: float
    ci_high: float
    kept: int


def trimmed_stats(values, low: float = 5.0, high: float = 95.0) -> CellSummary:
    """Mean of the values inside ``[P_low, P_high]`` plus a 95% normal CI."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise TooFewRecordsError(f"need at least 3 values, got {v.size}")
    lo, hi = np.percentile(v, [low, high])
    kept = v[(v >= lo) & (v <= hi)]
    mean = float(kept.mean())
    half = 1.96 * float(kept.std(ddof=1)) / math.sqrt(kept.size) if kept.size > 1 else 0.0
    return CellSummary(mean, mean - half, mean + half, int(kept.size))


def aggregate(records) -> tuple[float, float, float]:
    """Trimmed mean MSE and CI bounds over the successful runs of one cell."""
    ok = [r.mse for r in records if not r.failed]
    s = trimmed_stats(ok)
    return s.trimmed_mse, s.ci_low, s.ci_high


# -- one repetition ------------------------------------------------------

@dataclass(frozen=True)
class _Task:
    cfg: SuiteConfig
    n1: int
    n2: int
    rho: float
    sigma: float
    frac: float
    rep: int


def _basis_for(model, S1, S2, pairing):
    if model in APPROX_MODELS:
        return factored_basis(model, S1, S2, pairing)
    return exact_kron_basis(S1, S2)


def _evaluate(basis_fn, ds, fit_opts):
    """Build the basis, fit on the training split, score on the test split."""
    t0 = time.perf_counter()
    basis = basis_fn()
    problem = build_problem(basis, ds.y_train, ds.R_train)
    res = fit(problem, fit_opts)
    yhat = predict(basis, res.alpha, res.beta, ds.R_test)
    elapsed = time.perf_counter() - t0
    return mse(yhat, ds.y_test), elapsed, res.iterations


def _run_task(task: _Task) -> list[RunRecord]:
    cfg = task.cfg
    stream = RngStream(cfg.base_seed, task.rep)
    common = dict(suite=cfg.suite, graph_type=cfg.graph_type, n1=task.n1, n2=task.n2,
                  rho1=task.rho, rho2=task.rho, sigma=task.sigma, nkp_noise=task.frac,
                  rep=task.rep, seed=cfg.base_seed)

    def failed(model, exc):
        return RunRecord(model=model, mse=None, runtime_s=0.0, iterations=0, failed=True,
                         error=f"{type(exc).__name__}: {exc}", **common)

    try:
        if cfg.suite == "nkp":
            ds = gen_nkp_dataset(cfg.graph_type, task.n1, task.n2, task.rho, task.frac, task.sigma, rng=stream)
        else:
            ds = gen_dataset(cfg.graph_type, task.n1, task.n2, task.rho, task.sigma, rng=stream)
    except (KgcrfError, RuntimeError, ValueError) as exc:
        return [failed(m, exc) for m in cfg.models]

    resid_pre = resid_post = None
    S1, S2 = ds.S1, ds.S2
    nkp_error = None
    nkp_time = 0.0
    if cfg.suite == "nkp":
        try:
            t0 = time.perf_counter()
            S = ds.S
            f = nearest_kron(S, task.n1, task.n2, rng=stream.generator(8))
            S1, S2 = sparsify_factors(f, edge_density(ds.S1), edge_density(ds.S2))
            nkp_time = time.perf_counter() - t0
            resid_pre = f.residual_fro
            resid_post = kron_residual(S, S1.entries, S2.entries)
        except KgcrfError as exc:
            nkp_error = exc

    out = []
    for model in cfg.models:
        if nkp_error is not None and model != "base":
            out.append(failed(model, nkp_error))
            continue
        if model == SMOKE_MODEL:
            t0 = time.perf_counter()
            out.append(RunRecord(model=model, mse=mse(ds.R_test, ds.y_test),
                                 runtime_s=time.perf_counter() - t0, iterations=0, **common))
            continue
        if model == "base":
            # Exact eigen-system of the true network, Kronecker or not.
            basis_fn = ((lambda: exact_kron_basis(ds.S1, ds.S2)) if ds.is_kronecker
                        else (lambda: exact_basis(ds.S)))
        else:
            # In the nkp suite S1, S2 are the recovered, sparsified factors.
            basis_fn = lambda m=model: _basis_for(m, S1, S2, cfg.pairing_mode)  # noqa: E731
        try:
            err, elapsed, iters = _evaluate(basis_fn, ds, cfg.fit_options)
        except (KgcrfError, ArithmeticError, MemoryError, ValueError, np.linalg.LinAlgError) as exc:
            out.append(failed(model, exc))
            continue
        if not math.isfinite(err):
            out.append(failed(model, ValueError("non-finite prediction")))
            continue
        if model != "base":
            # Factor recovery is part of the cost of every factor-based model.
            elapsed += nkp_time
        out.append(RunRecord(model=model, mse=err, runtime_s=elapsed, iterations=iters,
                             resid_pre=resid_pre, resid_post=resid_post, **common))
    return out


# -- suites --------------------------------------------------------------

def _tasks(cfg: SuiteConfig, noises, fracs):
    for n1, n2 in cfg.sizes:
        for rho in cfg.densities:
            for sigma in noises:
                for frac in fracs:
                    for rep in range(cfg.reps):
                        yield _Task(cfg, n1, n2, rho, sigma, frac, rep)


def _run(cfg: SuiteConfig, tasks, workers: int) -> list[RunRecord]:
    tasks = list(tasks)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    return [r for chunk in chunks for r in chunk]


def run_fitness(cfg: SuiteConfig) -> list[RunRecord]:
    return _run(cfg, _tasks(cfg, cfg.output_noises, [0.0]), cfg.workers)


def run_robustness(cfg: SuiteConfig) -> list[RunRecord]:
    return _run(cfg, _tasks(cfg, cfg.output_noises, [0.0]), cfg.workers)


def run_timing(cfg: SuiteConfig) -> list[RunRecord]:
    # Single worker so that runs do not compete for cores.
    return _run(cfg, _tasks(cfg, cfg.output_noises, [0.0]), 1)


def run_nkp(cfg: SuiteConfig) -> list[RunRecord]:
    return _run(cfg, _tasks(cfg, cfg.output_noises, cfg.nkp_noises), cfg.workers)


RUNNERS = {"fitness": run_fitness, "robustness": run_robustness, "timing": run_timing, "nkp": run_nkp}


def run_suite(cfg: SuiteConfig) -> list[RunRecord]:
    return RUNNERS[cfg.suite](cfg)


# -- CSV output ----------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


_PARSERS = {int: int, float: float, str: str, bool: lambda s: s == "1"}


def _parse(name: str, text: str):
    ftype = {f.name: f.type for f in dataclasses.fields(RunRecord)}[name]
    if text == "" and "None" in str(ftype):
        return None
    base = ftype.split(" | ")[0] if isinstance(ftype, str) else ftype
    kind = {"int": int, "float": float, "str": str, "bool": bool}.get(base, base)
    return _PARSERS[kind](text)


def write_runs(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow([_fmt(getattr(r, k)) for k in RECORD_FIELDS])


def read_runs(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [RunRecord(**{k: _parse(k, row[k]) for k in RECORD_FIELDS}) for row in rows]


SUMMARY_FIELDS = CELL_FIELDS + [
    "runs", "failed", "trimmed_mse", "ci_low", "ci_high",
    "mean_runtime_s", "std_runtime_s", "mean_iterations", "mean_resid_pre", "mean_resid_post",
]


def _mean_or_none(xs):
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else None


def summarize(records) -> list[dict]:
    """One row per cell, in first-seen cell order."""
    order = {}
    for r in records:
        order.setdefault(r.cell, len(order))
    rows = []
    for cell, group in groupby(sorted(records, key=lambda r: (order[r.cell], r.rep)), key=lambda r: r.cell):
        group = list(group)
        ok = [r for r in group if not r.failed]
        row = dict(zip(CELL_FIELDS, cell))
        row.update(runs=len(group), failed=len(group) - len(ok))
        try:
            row["trimmed_mse"], row["ci_low"], row["ci_high"] = aggregate(ok)
        except TooFewRecordsError:
            row["trimmed_mse"] = row["ci_low"] = row["ci_high"] = None
        times = [r.runtime_s for r in ok]
        row["mean_runtime_s"] = _mean_or_none(times)
        row["std_runtime_s"] = float(np.std(times, ddof=1)) if len(times) > 1 else None
        row["mean_iterations"] = _mean_or_none([r.iterations for r in ok])
        row["mean_resid_pre"] = _mean_or_none([r.resid_pre for r in ok])
        row["mean_resid_post"] = _mean_or_none([r.resid_post for r in ok])
        rows.append(row)
    return rows


def write_summary(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_FIELDS)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in SUMMARY_FIELDS])


# Which summary column forms the x-axis of each suite's figure.
_X_AXIS = {"fitness": "rho1", "robustness": "sigma", "timing": "N", "nkp": "nkp_noise"}


def plot_series(rows) -> dict[str, list[tuple[float, float]]]:
    """Two-column series keyed by file stem: one per figure and model."""
    series: dict[str, list] = {}
    for row in rows:
        suite = row["suite"]
        y = row["mean_runtime_s"] if suite == "timing" else row["trimmed_mse"]
        if y is None:
            continue
        if suite == "timing":
            x = row["n1"] * row["n2"]
            stem = f"timing_{row['graph_type']}_rho{row['rho1']:g}_{row['model']}"
        else:
            x = row[_X_AXIS[suite]]
            stem = f"{suite}_{row['graph_type']}_{row['n1']}x{row['n2']}"
            if suite == "robustness":
                stem += f"_rho{row['rho1']:g}"
            elif suite == "nkp":
                stem += f"_rho{row['rho1']:g}_sigma{row['sigma']:g}"
            else:
                stem += f"_sigma{row['sigma']:g}"
            stem += f"_{row['model']}"
        series.setdefault(stem, []).append((x, y))
    return {k: sorted(v) for k, v in series.items()}


def write_outputs(out_dir, records) -> list[dict]:
    out = Path(out_dir)
    (out / "plotdata").mkdir(parents=True, exist_ok=True)
    write_runs(out / "runs.csv", records)
    rows = summarize(records)
    write_summary(out / "summary.csv", rows)
    for stem, pts in plot_series(rows).items():
        ylabel = "mean_runtime_s" if stem.startswith("timing") else "trimmed_mse"
        xlabel = "N" if stem.startswith("timing") else _X_AXIS[stem.split("_")[0]]
        with open(out / "plotdata" / f"{stem}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([xlabel, ylabel])
            w.writerows([_fmt(float(x)), _fmt(float(y))] for x, y in pts)
    return rows
