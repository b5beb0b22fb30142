# src/ldp/privacy_check.py
"""
Likelihood-ratio checks of epsilon-LDP.

For a mechanism with output distribution Pr[y | v], epsilon-LDP holds when
max over (v1, v2, y) of Pr[y | v1] / Pr[y | v2] <= e^eps. The check enumerates
every output where that is feasible (DE, UE), conditions on the public hash
seed for local hashing, and scans a grid of the two coordinates that differ
for histogram encoding.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import PrivacyBudget
from .errors import ParameterError
from .hash_utils import draw_seeds, hash_values
from .protocols import HE_KINDS, LH_KINDS, UE_KINDS, ProtocolKind, ProtocolSpec

logger = logging.getLogger(__name__)

RATIO_SLACK = 1e-9
MAX_EXHAUSTIVE_D = {
    ProtocolKind.DE: 12,
    ProtocolKind.SUE: 4,
    ProtocolKind.OUE: 4,
}


@dataclass(frozen=True)
class PrivacyCheckResult:
    kind: ProtocolKind
    epsilon: float
    d: int
    mode: str
    max_ratio: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.bound

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


class CheckTooLargeError(ParameterError):
    """Domain too large for exhaustive enumeration."""


def max_likelihood_ratio(probs: np.ndarray) -> float:
    """
    probs[v, y] = Pr[output y | input v]. Returns max_y max_v probs / min_v probs
    (inf when some output is possible under one input and impossible under another).
    """
    hi = probs.max(axis=0)
    lo = probs.min(axis=0)
    live = hi > 0
    if np.any(lo[live] == 0):
        return math.inf
    return float((hi[live] / lo[live]).max())


def de_output_matrix(d: int, p: float, q: float) -> np.ndarray:
    probs = np.full((d, d), q, dtype=np.float64)
    np.fill_diagonal(probs, p)
    return probs


def ue_output_matrix(d: int, p: float, q: float) -> np.ndarray:
    """All 2^d outputs; Pr[B | v] is the product of independent per-bit probabilities."""
    outputs = np.array(list(itertools.product((0, 1), repeat=d)), dtype=bool)
    probs = np.empty((d, outputs.shape[0]), dtype=np.float64)
    for v in range(d):
        one = np.where(np.arange(d) == v, p, q)
        per_bit = np.where(outputs, one, 1.0 - one)
        probs[v] = per_bit.prod(axis=1)
    return probs


def lh_conditional_ratio(d: int, g: int, p: float, q: float, seeds: np.ndarray) -> float:
    """
    For a fixed seed, Pr[y | v] = p if H(v) == y else q. The worst output is
    p/q whenever one value hashes to y and another does not.
    """
    values = np.arange(d, dtype=np.int64)
    worst = 1.0
    for seed in seeds:
        hv = hash_values(seed, values, g).astype(np.int64)
        hits = np.bincount(hv, minlength=g)
        hi = np.where(hits > 0, p, q)
        lo = np.where(hits < d, q, p)
        worst = max(worst, float((hi / lo).max()))
    return worst


def he_grid_ratio(epsilon: float, points: int = 121) -> float:
    """
    Density ratio of the Laplace(2/eps) histogram for inputs v1 != v2 over a grid
    of (x[v1], x[v2]); every other coordinate cancels.
    """
    b = 2.0 / epsilon
    x = np.linspace(-2.0, 3.0, points)
    a1, a2 = np.meshgrid(x, x, indexing="ij")
    # log f(x | v1) - log f(x | v2) on the two coordinates that differ
    log_ratio = (-np.abs(a1 - 1.0) - np.abs(a2) + np.abs(a1) + np.abs(a2 - 1.0)) / b
    return float(np.exp(log_ratio.max()))


def check_privacy(
    kind: Union[str, ProtocolKind],
    epsilon: float,
    d: int,
    p: Optional[float] = None,
    q: Optional[float] = None,
    seeds: int = 16,
    rng_seed: int = 0,
) -> PrivacyCheckResult:
    """
    Max likelihood ratio of the protocol against e^eps * (1 + 1e-9).

    p, q override the derived DE/UE/LH probabilities (used to show that a
    corrupted parameter set is caught).
    """
    kind = ProtocolKind.parse(kind)
    budget = PrivacyBudget(epsilon)
    bound = budget.exp_eps * (1.0 + RATIO_SLACK)

    limit = MAX_EXHAUSTIVE_D.get(kind)
    if limit is not None and d > limit:
        raise CheckTooLargeError(
            f"{kind.label} exhaustive check enumerates all outputs and supports d <= {limit}; "
            f"got d={d}. Rerun with a smaller --d (the guarantee does not depend on d)."
        )

    spec = ProtocolSpec.build(kind, budget, d)
    pp = spec.p if p is None else float(p)
    qq = spec.q if q is None else float(q)

    if kind is ProtocolKind.DE:
        ratio = max_likelihood_ratio(de_output_matrix(d, pp, qq))
        mode = "exhaustive"
    elif kind in UE_KINDS:
        ratio = max_likelihood_ratio(ue_output_matrix(d, pp, qq))
        mode = "exhaustive"
    elif kind in LH_KINDS:
        rng = np.random.default_rng(rng_seed)
        ratio = lh_conditional_ratio(d, spec.g, pp, qq, draw_seeds(rng, seeds))
        mode = "conditional"
    elif kind in HE_KINDS:
        ratio = he_grid_ratio(budget.epsilon)
        mode = "grid"
    else:  # pragma: no cover
        raise ParameterError(f"no privacy check for {kind.label}")

    result = PrivacyCheckResult(kind, budget.epsilon, d, mode, ratio, bound)
    logger.info("%s privacy check (%s): max ratio %.12g vs bound %.12g -> %s",
                kind.label, mode, ratio, bound, result.verdict)
    return result
