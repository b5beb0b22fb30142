# src/simharness/runner.py
"""
Trial execution.

Users are cut into fixed-size blocks (size set by the protocol and d only). Block
b of trial t draws from its own Generator seeded by
SeedSequence(master_seed, spawn_key=(t, REPORT_STREAM, b)), is perturbed and
folded into support counts, and the partial counts are summed in block order.
The result is therefore the same for any number of threads.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.analytics.significance import ThresholdSpec, significance_threshold
from src.ldp.core import EstimateVector, clamp_estimates, estimate, merge_counts
from src.ldp.protocols import ProtocolKind, ProtocolSpec

from .config import ExperimentConfig, FromFile, Uniform, Zipf
from .errors import ConfigError
from .metrics import avg_sq_error
from .workload import gen_uniform, gen_zipf, ingest_values, true_counts

logger = logging.getLogger(__name__)

DATA_STREAM = 0
REPORT_STREAM = 1


@dataclass(frozen=True, eq=False)
class TrialResult:
    trial_index: int
    true_counts: np.ndarray
    estimates: EstimateVector
    avg_sq_error: float
    seconds: float
    # per-value support counts; SHE has none and stores its noisy sums here
    support_counts: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.true_counts.sum())


def data_seed(master_seed: int, trial_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial_index, DATA_STREAM))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def block_rng(master_seed: int, trial_index: int, block_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial_index, REPORT_STREAM, block_index))
    return np.random.default_rng(ss)


def generate_values(config: ExperimentConfig, trial_index: int) -> np.ndarray:
    dist = config.distribution
    if isinstance(dist, FromFile):
        return ingest_values(dist.path, config.d)
    seed = data_seed(config.master_seed, trial_index)
    if isinstance(dist, Zipf):
        return gen_zipf(config.d, dist.s, config.n, seed)
    if isinstance(dist, Uniform):
        return gen_uniform(config.d, config.n, seed)
    raise ConfigError(f"unsupported distribution {dist!r}")  # pragma: no cover


def collect_counts(
    spec: ProtocolSpec,
    values: np.ndarray,
    master_seed: int,
    trial_index: int,
    threads: int = 1,
) -> np.ndarray:
    """Perturb every user's value and fold the reports into support counts."""
    size = spec.block_size()
    n_blocks = (values.shape[0] + size - 1) // size

    def work(b: int) -> np.ndarray:
        rng = block_rng(master_seed, trial_index, b)
        block = spec.perturb_block(values[b * size:(b + 1) * size], rng)
        return spec.count_block(block)

    if threads <= 1 or n_blocks <= 1:
        partials = [work(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(work, range(n_blocks)))

    logger.debug("%s: %d users in %d blocks of %d", spec.kind.label, values.shape[0], n_blocks, size)
    return merge_counts(partials, spec.d)


def aggregate_counts(spec: ProtocolSpec, counts: np.ndarray, n: int) -> EstimateVector:
    if spec.kind is ProtocolKind.SHE:
        return EstimateVector(estimates=np.asarray(counts, dtype=np.float64), n=n)
    return estimate(counts, n, spec.pure_params(), d=spec.d)


def run_trial(
    config: ExperimentConfig,
    trial_index: int = 0,
    threads: int = 1,
    values: Optional[np.ndarray] = None,
) -> TrialResult:
    """Generate data, report, aggregate and score one trial."""
    spec = config.spec
    t0 = time.perf_counter()

    if values is None:
        values = generate_values(config, trial_index)
    n = int(values.shape[0])
    if n == 0:
        raise ConfigError("no user values to run (n = 0)")

    truth = true_counts(values, spec.d)
    counts = collect_counts(spec, values, config.master_seed, trial_index, threads)
    ev = aggregate_counts(spec, counts, n)
    if config.clamp:
        ev = clamp_estimates(ev)

    err = avg_sq_error(ev.estimates, truth)
    seconds = time.perf_counter() - t0
    logger.info("trial %d: %s n=%d avg_sq_error=%.6g (%.2fs)",
                trial_index, spec.describe(), n, err, seconds)
    return TrialResult(trial_index, truth, ev, err, seconds, counts)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> List[TrialResult]:
    """All repetitions of config; file input is read once and reused."""
    values = None
    if isinstance(config.distribution, FromFile):
        values = generate_values(config, 0)
    return [run_trial(config, t, threads, values) for t in range(config.repetitions)]


def resolve_threshold(config: ExperimentConfig, n: int) -> float:
    """The explicit threshold, or T_s from the protocol's own Var* at alpha."""
    if config.threshold is not None:
        return float(config.threshold)
    spec = ThresholdSpec(d=config.d, n=n, var_per_user=config.spec.var_star(), alpha=config.threshold_alpha)
    return significance_threshold(spec)


def analytic_sq_error(config: ExperimentConfig, n: int) -> float:
    """n * Var* of the protocol instance actually run (integer g for OLH)."""
    return n * config.spec.var_star()
