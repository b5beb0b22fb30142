# src/simharness/metrics.py
from __future__ import annotations

from typing import Tuple

import numpy as np

from src.ldp.errors import ParameterError


def avg_sq_error(estimates: np.ndarray, true_counts: np.ndarray) -> float:
    """(1/d) * sum_i (estimate[i] - true_count[i])^2."""
    diff = np.asarray(estimates, dtype=np.float64) - np.asarray(true_counts, dtype=np.float64)
    return float(np.mean(diff * diff))


def top_k_values(true_counts: np.ndarray, k: int) -> np.ndarray:
    """The k values with the largest true counts; ties go to the smaller value."""
    counts = np.asarray(true_counts)
    if not (1 <= k <= counts.shape[0]):
        raise ParameterError(f"k must be in [1, {counts.shape[0]}], got {k}")
    order = np.argsort(-counts, kind="stable")
    return order[:k]


def topk_error(result, k: int) -> float:
    """Average squared error over the k most frequent true values."""
    idx = top_k_values(result.true_counts, k)
    return avg_sq_error(result.estimates.estimates[idx], result.true_counts[idx])


def tp_fp(result, threshold: float) -> Tuple[int, int]:
    """
    tp: values truly above the threshold and estimated above it.
    fp: values truly at or below it but estimated above it.
    """
    if threshold < 0:
        raise ParameterError(f"threshold must be >= 0, got {threshold}")
    est_above = result.estimates.estimates > threshold
    true_above = result.true_counts > threshold
    tp = int(np.count_nonzero(est_above & true_above))
    fp = int(np.count_nonzero(est_above & ~true_above))
    return tp, fp
