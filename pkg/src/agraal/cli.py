"""Command line interface: ``agraal solve | bench | list-problems | validate-config``.

Exit codes: 0 on normal completion (a run stopped by ``max_iters`` included),
2 on configuration or usage errors, 3 when a single ``solve`` run hits a
numerical failure.
"""

import argparse
import math
import logging
import os
import sys

from .bench import config as cfg
from .bench.experiment import format_table, run_cell, run_experiment, trace_csv
from .errors import ConfigError
from .solvers import METHODS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parser():
    p = argparse.ArgumentParser(prog="agraal", description="Adaptive golden ratio solvers and benchmarks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one method on one problem instance")
    s.add_argument("--problem", required=True, choices=cfg.FAMILIES)
    s.add_argument("--method", required=True, choices=METHODS)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--scenario", choices=("a", "b"))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise-std", type=float, default=1.0)
    s.add_argument("--density", type=float, default=0.05)
    s.add_argument("--gamma", type=float)
    s.add_argument("--data", help="LIBSVM file for the logistic family")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--max-iters", type=int, default=10_000)
    s.add_argument("--max-seconds", type=float)
    s.add_argument("--phi", type=float, default=1.5)
    s.add_argument("--lam-max", type=float, default=1e7)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--lam", type=float, help="fixed step for graal, pgm, fista")
    s.add_argument("--lam0", type=float, help="initial step of the adaptive methods and fbf")
    s.add_argument("--output", help="CSV path (default: <problem>_seed<seed>_<method>.csv in the output dir)")
    s.add_argument("--timing", action="store_true", help="fill the elapsed_s column")

    b = sub.add_parser("bench", help="run a configuration file or a shipped preset")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("config", nargs="?", help="configuration file")
    src.add_argument("--preset", help="name of a shipped preset")
    b.add_argument("--output-dir", help="override output.dir")
    b.add_argument("--workers", type=int, help="override output.workers")

    sub.add_parser("list-problems", help="print problem families and their parameters")

    v = sub.add_parser("validate-config", help="check a configuration file without running it")
    v.add_argument("config")
    return p


def _solve_config(a):
    problem = cfg.ProblemSpec(
        family=a.problem,
        n=a.n,
        m=a.m,
        scenario=a.scenario,
        seeds=(a.seed,),
        noise_std=a.noise_std,
        density=a.density,
        gamma=a.gamma,
        data=a.data,
    )
    method = cfg.MethodSpec(
        names=(a.method,), phi=a.phi, lam_max=a.lam_max, delta=a.delta, lam=a.lam, lam0=a.lam0
    )
    stop = cfg.StopSpec(tol=a.tol, max_iters=a.max_iters, max_seconds=a.max_seconds)
    out_dir = os.environ.get(cfg.OUTPUT_DIR_ENV) or "."
    output = cfg.OutputSpec(dir=out_dir, timing=a.timing)
    return cfg.validate(cfg.ExperimentConfig(problem, method, stop, output, name=a.problem))


def _cmd_solve(a):
    config = _solve_config(a)
    trace, wall = run_cell(config, a.seed, a.method)
    path = a.output or os.path.join(config.output.dir, f"{a.problem}_seed{a.seed}_{a.method}.csv")
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(trace_csv(trace, a.timing))
    if trace.reason == "numerical-failure":
        print(f"numerical failure: {trace.message}", file=sys.stderr)
        print(f"wrote {path}")
        return EXIT_NUMERICAL
    last = trace.records[-1] if trace.records else None
    print(
        f"{a.method} on {a.problem} (n={a.n}, seed={a.seed}): {trace.reason} after {len(trace)} "
        f"iterations, {last.fevals if last else 0} F-evaluations, residual {last.residual if last else math.nan:.3e}"
    )
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_bench(a):
    config = cfg.load_preset(a.preset) if a.preset else cfg.load_config(a.config)
    if a.output_dir:
        config = config.with_output(dir=a.output_dir)
    if a.workers is not None:
        config = config.with_output(workers=a.workers)
    cfg.validate(config)
    result = run_experiment(config)
    print(format_table(result.rows))
    print(f"wrote {len(result.paths)} files to {config.output.dir}")
    return EXIT_OK


def _cmd_list():
    for family in cfg.FAMILIES:
        print(f"{family:<16} {cfg.FAMILY_DESCRIPTIONS[family]}")
        print(f"{'':<16} parameters: {cfg.FAMILY_PARAMS[family]}")
    print(f"presets: {', '.join(cfg.preset_names())}")
    return EXIT_OK


def _cmd_validate(a):
    config = cfg.load_config(a.config)
    cells = len(config.problem.seeds) * len(config.method.names)
    print(f"ok: {config.problem.family}, methods {', '.join(config.method.names)}, {cells} cells")
    return EXIT_OK


def main(argv=None):
    parser = _parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if a.command == "solve":
            return _cmd_solve(a)
        if a.command == "bench":
            return _cmd_bench(a)
        if a.command == "list-problems":
            return _cmd_list()
        return _cmd_validate(a)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        # ValueError: solver arguments that can only be checked against a built problem
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
