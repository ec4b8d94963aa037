"""Run (seed x method) sweeps, write per-iteration CSV traces and a summary table."""

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DomainError, LinesearchFailure
from ..problems import (
    NONTRIVIAL_NORM,
    make_balls_cfp,
    make_linear_cfp,
    make_logistic,
    make_nash,
    make_nonmonotone,
    make_random_saddle,
    make_synthetic_logistic,
    parse_libsvm,
)
from ..prox import DiagonalMetric
from ..solvers import CSV_COLUMNS, StopRule, Trace, run
from .config import ExperimentConfig

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = (
    "seed",
    "method",
    "iterations_to_tol",
    "fevals_to_tol",
    "final_residual",
    "wall_seconds",
    "success",
)


def build_problem(spec, seed):
    """Problem instance of ``spec.family`` for one seed."""
    f = spec.family
    if f == "nash":
        return make_nash(spec.scenario, spec.n, seed)
    if f == "balls-cfp":
        return make_balls_cfp(spec.n, spec.m, seed)
    if f == "linear-cfp":
        return make_linear_cfp(spec.n, spec.m, spec.noise_std, seed, spec.density)
    if f == "logistic":
        if spec.data is not None:
            with open(spec.data, encoding="utf-8") as fh:
                A, b = parse_libsvm(fh, n_features=spec.n)
            return make_logistic(A, b, spec.gamma)
        return make_synthetic_logistic(spec.m, spec.n, seed, spec.gamma)
    if f == "nonmonotone":
        return make_nonmonotone(spec.n, seed)
    if f == "bilinear-saddle":
        return make_random_saddle(spec.n, seed)
    raise ValueError(f"unknown family {f!r}")


def _metric(weights, n):
    if weights is None:
        return DiagonalMetric.identity(n)
    return DiagonalMetric(np.broadcast_to(np.asarray(weights, dtype=float), (n,)).copy())


def run_cell(config: ExperimentConfig, seed, method, problem=None):
    """One solver run; failures inside the iteration end up in ``trace.reason``.

    Wall time excludes problem construction.
    """
    problem = problem if problem is not None else build_problem(config.problem, seed)
    m, s = config.method, config.stop
    stop = StopRule(
        tol=s.residual_tol if s.residual_tol is not None else s.tol,
        max_iters=s.max_iters,
        max_fevals=s.max_fevals,
        max_seconds=s.max_seconds,
    )
    metric = None
    if method == "agraal-metric":
        metric = (_metric(m.metric_m, problem.n), _metric(m.metric_p, problem.n))
    t0 = time.perf_counter()
    try:
        trace = run(
            method,
            problem,
            rule=m.rule,
            stop=stop,
            lam=m.lam,
            lam0=m.lam0,
            metric=metric,
            fbf={"nu": m.fbf_nu, "shrink": m.fbf_shrink, "grow": m.fbf_grow},
            residual_lambda=m.residual_lambda,
            seed=seed,
            track_energy=config.output.energy,
            track_ergodic=config.output.energy and config.problem.family == "logistic",
            log_every=config.output.log_every,
        )
    except (LinesearchFailure, DomainError) as exc:
        log.warning("seed %s, %s failed: %s", seed, method, exc)
        trace = Trace(method, reason="numerical-failure", message=str(exc))
    return trace, time.perf_counter() - t0


@dataclass(frozen=True)
class SummaryRow:
    seed: int
    method: str
    iterations_to_tol: Optional[int]
    fevals_to_tol: Optional[int]
    final_residual: float
    wall_seconds: Optional[float]
    success: bool


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: dict
    rows: list
    j_star: dict
    paths: dict


def energy_optimum(traces):
    """Smallest energy seen by any of ``traces``; NaN if none tracked energy."""
    best = min((t.energy_min for t in traces), default=math.inf)
    return best if math.isfinite(best) else math.nan


def summarize(config: ExperimentConfig, seed, method, trace, wall, j_star=math.nan):
    """Summary row of one cell.

    Logistic cells succeed when the final energy gap ``J - J*`` is at most
    ``stop.tol`` and report that gap as their residual; nonmonotone cells
    also need ``||z|| >= NONTRIVIAL_NORM``; all others succeed iff the run
    converged.
    """
    tol = config.stop.tol
    wall = wall if config.output.timing else None
    if not trace.records:
        return SummaryRow(seed, method, None, None, math.nan, wall, False)
    last = trace.records[-1]
    if config.problem.family == "logistic" and config.output.energy:
        gaps = trace.column("energy") - j_star
        final = float(gaps[-1])
        hits = np.flatnonzero(gaps <= tol)
        success = bool(final <= tol)
        first = trace.records[hits[0]] if success else None
    else:
        final = last.residual
        success = trace.converged
        if config.problem.family == "nonmonotone":
            success = success and last.z_norm >= NONTRIVIAL_NORM
        first = last if success else None
    return SummaryRow(
        seed,
        method,
        first.k if first else None,
        first.fevals if first else None,
        final,
        wall,
        success,
    )


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    return str(value)


def trace_csv(trace, timing=False):
    """Per-iteration CSV text; unavailable quantities are left empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in trace.records:
        w.writerow(
            [
                _fmt(r.k),
                _fmt(r.lam),
                _fmt(r.theta),
                _fmt(r.residual),
                _fmt(r.energy),
                _fmt(r.dist_opt),
                _fmt(r.fevals),
                _fmt(r.proxevals),
                _fmt(r.elapsed_s) if timing else "",
            ]
        )
    return buf.getvalue()


def summary_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def read_csv(path):
    """Rows of a CSV written by this module as dicts of strings."""
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def cell_filename(config, seed, method):
    return f"{config.name}_seed{seed}_{method}.csv"


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _cell_job(args):
    config, seed, method = args
    return run_cell(config, seed, method)


def run_experiment(config: ExperimentConfig, out_dir=None, write=True):
    """Run every (seed x method) cell of ``config``.

    With ``output.workers > 1`` cells run in a process pool. Results are
    joined in config order so files do not depend on scheduling. Returns an
    :class:`ExperimentResult`; CSV files go to ``out_dir`` (default
    ``config.output.dir``) unless ``write`` is false.
    """
    cells = [(seed, method) for seed in config.problem.seeds for method in config.method.names]
    if config.output.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(config.output.workers, len(cells))) as pool:
            outcomes = list(pool.map(_cell_job, [(config, s, m) for s, m in cells]))
    else:
        outcomes = [run_cell(config, s, m) for s, m in cells]
    results = dict(zip(cells, outcomes))

    traces = {cell: tr for cell, (tr, _) in results.items()}
    j_star = {}
    rows = []
    for seed in config.problem.seeds:
        j_star[seed] = energy_optimum(traces[(seed, m)] for m in config.method.names)
        for method in config.method.names:
            trace, wall = results[(seed, method)]
            rows.append(summarize(config, seed, method, trace, wall, j_star[seed]))

    paths = {}
    if write:
        out_dir = out_dir or config.output.dir
        os.makedirs(out_dir, exist_ok=True)
        for (seed, method), trace in traces.items():
            path = os.path.join(out_dir, cell_filename(config, seed, method))
            _write(path, trace_csv(trace, config.output.timing))
            paths[(seed, method)] = path
        paths["summary"] = os.path.join(out_dir, f"{config.name}_summary.csv")
        _write(paths["summary"], summary_csv(rows))
    return ExperimentResult(config, traces, rows, j_star, paths)


def format_table(rows):
    """Plain-text summary table with per-method success rate and mean iterations."""
    lines = [f"{'seed':>6} {'method':<16} {'iters':>8} {'fevals':>9} {'residual':>11} {'ok':>3}"]
    for r in rows:
        lines.append(
            f"{r.seed:>6} {r.method:<16} {_fmt(r.iterations_to_tol) or '-':>8} "
            f"{_fmt(r.fevals_to_tol) or '-':>9} {r.final_residual:>11.3e} {'yes' if r.success else 'no':>3}"
        )
    methods = list(dict.fromkeys(r.method for r in rows))
    for m in methods:
        mine = [r for r in rows if r.method == m]
        wins = [r.iterations_to_tol for r in mine if r.success]
        mean = f"{np.mean(wins):.1f}" if wins else "-"
        lines.append(f"# {m}: success {len(wins)}/{len(mine)}, mean iterations {mean}")
    return "\n".join(lines)
