"""Experiment harness: configuration files, sweeps and CSV output."""

from .config import (
    FAMILIES,
    ExperimentConfig,
    MethodSpec,
    OutputSpec,
    ProblemSpec,
    StopSpec,
    load_config,
    load_preset,
    parse_config,
    preset_names,
    validate,
)
from .experiment import (
    SUMMARY_COLUMNS,
    ExperimentResult,
    SummaryRow,
    build_problem,
    format_table,
    read_csv,
    run_cell,
    run_experiment,
    summary_csv,
    trace_csv,
)
