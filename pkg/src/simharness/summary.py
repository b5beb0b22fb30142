# src/simharness/summary.py
from __future__ import annotations

from typing import Any, Dict, List, Sequence

import numpy as np

from .config import ExperimentConfig
from .metrics import topk_error, tp_fp
from .runner import TrialResult, analytic_sq_error, resolve_threshold

SUMMARY_REP = "summary"

# one row per repetition, then the summary row
BENCH_COLUMNS = [
    "protocol",
    "epsilon",
    "d",
    "n",
    "rep",
    "avg_sq_error",
    "avg_sq_error_std",
    "analytic_sq_error",
    "topk_error",
    "tp",
    "fp",
    "threshold",
    "seconds",
]


def trial_row(config: ExperimentConfig, result: TrialResult, timing: bool = False) -> Dict[str, Any]:
    n = result.n
    threshold = resolve_threshold(config, n)
    tp, fp = tp_fp(result, threshold)
    return {
        "protocol": config.kind.value,
        "epsilon": float(config.epsilon),
        "d": config.d,
        "n": n,
        "rep": result.trial_index,
        "avg_sq_error": result.avg_sq_error,
        "avg_sq_error_std": None,
        "analytic_sq_error": analytic_sq_error(config, n),
        "topk_error": topk_error(result, config.effective_top_k),
        "tp": tp,
        "fp": fp,
        "threshold": threshold,
        "seconds": result.seconds if timing else None,
    }


def summary_row(rows: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    """Mean of every metric over the rep rows; stddev (ddof=1) of avg_sq_error."""
    if not rows:
        raise ValueError("no rep rows to summarise")

    def mean(col: str) -> float:
        return float(np.mean([r[col] for r in rows]))

    errs = np.array([r["avg_sq_error"] for r in rows], dtype=np.float64)
    first = rows[0]
    timed = first["seconds"] is not None
    return {
        "protocol": first["protocol"],
        "epsilon": first["epsilon"],
        "d": first["d"],
        "n": first["n"],
        "rep": SUMMARY_REP,
        "avg_sq_error": float(errs.mean()),
        "avg_sq_error_std": float(errs.std(ddof=1)) if errs.size > 1 else 0.0,
        "analytic_sq_error": mean("analytic_sq_error"),
        "topk_error": mean("topk_error"),
        "tp": mean("tp"),
        "fp": mean("fp"),
        "threshold": mean("threshold"),
        "seconds": mean("seconds") if timed else None,
    }


def bench_rows(
    config: ExperimentConfig,
    results: Sequence[TrialResult],
    timing: bool = False,
) -> List[Dict[str, Any]]:
    rows = [trial_row(config, r, timing) for r in results]
    rows.append(summary_row(rows))
    return rows
