# src/simharness/workload.py
from __future__ import annotations

import logging
from pathlib import Path
from typing import Union

import numpy as np

from src.ldp.errors import ParameterError

from .errors import DatasetError

logger = logging.getLogger(__name__)


def zipf_probabilities(d: int, s: float) -> np.ndarray:
    """Rank k (1-based) has weight 1/k^s; rank 1 is value 0."""
    if s <= 0:
        raise ParameterError(f"Zipf exponent must be > 0, got {s}")
    weights = 1.0 / np.arange(1, d + 1, dtype=np.float64) ** s
    return weights / weights.sum()


def gen_zipf(d: int, s: float, n: int, seed: int) -> np.ndarray:
    """n i.i.d. values in [d] from a truncated Zipf(s); deterministic given seed."""
    probs = zipf_probabilities(d, s)
    rng = np.random.default_rng(seed)
    return rng.choice(d, size=n, p=probs).astype(np.int64)


def gen_uniform(d: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, d, size=n, dtype=np.int64)


def ingest_values(path: Union[str, Path], d: int) -> np.ndarray:
    """
    One base-10 integer per line, each in [0, d). Blank lines are skipped.
    Errors name the offending line.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError("file not found", path)

    out = []
    try:
        f = path.open("rb")
    except OSError as e:
        raise DatasetError(f"cannot read file ({e.strerror or e})", path) from None
    with f:
        for line_no, raw in enumerate(f, start=1):
            try:
                text = raw.decode("utf-8").strip()
            except UnicodeDecodeError:
                raise DatasetError("line is not valid UTF-8", path, line_no) from None
            if not text:
                continue
            try:
                v = int(text, 10)
            except ValueError:
                raise DatasetError(f"not an integer: {text!r}", path, line_no) from None
            if v < 0 or v >= d:
                raise DatasetError(f"value {v} outside [0, {d})", path, line_no)
            out.append(v)

    logger.info("ingested %d values from %s", len(out), path)
    return np.asarray(out, dtype=np.int64)


def true_counts(values: np.ndarray, d: int) -> np.ndarray:
    return np.bincount(values, minlength=d).astype(np.int64)
