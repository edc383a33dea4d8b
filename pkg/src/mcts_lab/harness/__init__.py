"""Experiment configs, batch runner, runtime measurement and the command line."""
from .config import AgentSpec, ConfigValidationError, ExperimentConfig, Telemetry, load_config, parse_config
from .runner import (
    COLUMNS,
    SCHEMA_VERSION,
    GridMismatch,
    HarnessError,
    PartialResults,
    ResultRow,
    abstraction_rate_study,
    measure_runtime,
    perf_matrix,
    read_results,
    run_episode,
    run_experiment,
    score_results,
    worker_count,
)

__all__ = [
    "AgentSpec", "COLUMNS", "ConfigValidationError", "ExperimentConfig", "GridMismatch",
    "HarnessError", "PartialResults", "ResultRow", "SCHEMA_VERSION", "Telemetry",
    "abstraction_rate_study", "load_config", "measure_runtime", "parse_config", "perf_matrix",
    "read_results", "run_episode", "run_experiment", "score_results", "worker_count",
]
