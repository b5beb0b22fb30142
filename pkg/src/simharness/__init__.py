# src/simharness/__init__.py
from .config import ExperimentConfig, FromFile, Uniform, Zipf, parse_distribution
from .errors import ConfigError, DatasetError
from .metrics import avg_sq_error, topk_error, tp_fp
from .runner import TrialResult, run_experiment, run_trial
from .summary import BENCH_COLUMNS, bench_rows
from .workload import gen_uniform, gen_zipf, ingest_values

__all__ = [
    "BENCH_COLUMNS",
    "ConfigError",
    "DatasetError",
    "ExperimentConfig",
    "FromFile",
    "TrialResult",
    "Uniform",
    "Zipf",
    "avg_sq_error",
    "bench_rows",
    "gen_uniform",
    "gen_zipf",
    "ingest_values",
    "parse_distribution",
    "run_experiment",
    "run_trial",
    "topk_error",
    "tp_fp",
]
