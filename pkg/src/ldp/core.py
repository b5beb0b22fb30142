# src/ldp/core.py
"""
The pure-protocol framework.

A protocol is "pure" when there are two probabilities p* > q* such that every
input lands in its own support set with probability p*, and in the support set
of any other input with probability q*. For such protocols the aggregator only
needs, for every value i, how many reports support i:

    estimate[i] = (support_count[i] - n * q*) / (p* - q*)

which is unbiased, with variance

    n * q*(1 - q*) / (p* - q*)^2  +  n * f_i * (1 - p* - q*) / (p* - q*)

The first term alone is Var*, the approximation used to compare protocols.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Protocol, Sequence, Union

import numpy as np

from .errors import DomainError, ParameterError, VariantMismatchError


# ----------------------------
# Domain types
# ----------------------------

@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float

    def __post_init__(self) -> None:
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps <= 0:
            raise ParameterError(f"epsilon must be a positive finite number, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

    @cached_property
    def exp_eps(self) -> float:
        # computed once per budget; every derived p/q uses it
        return math.exp(self.epsilon)


@dataclass(frozen=True)
class Domain:
    d: int

    def __post_init__(self) -> None:
        if isinstance(self.d, bool) or int(self.d) != self.d:
            raise ParameterError(f"domain size must be an integer, got {self.d!r}")
        if int(self.d) < 2:
            raise ParameterError(f"domain size must be >= 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))

    def check(self, v: int) -> int:
        iv = int(v)
        if iv < 0 or iv >= self.d:
            raise DomainError(f"value {v} outside domain [0, {self.d})")
        return iv


@dataclass(frozen=True)
class PureParams:
    p_star: float
    q_star: float

    def __post_init__(self) -> None:
        p, q = float(self.p_star), float(self.q_star)
        if not (0.0 < q < p <= 1.0):
            raise ParameterError(f"pure params need 0 < q* < p* <= 1, got p*={p}, q*={q}")
        object.__setattr__(self, "p_star", p)
        object.__setattr__(self, "q_star", q)


# ----------------------------
# Reports (one per user)
# ----------------------------

@dataclass(frozen=True)
class Categorical:
    value: int


@dataclass(frozen=True, eq=False)
class Histogram:
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class BitVector:
    bits: np.ndarray


@dataclass(frozen=True)
class Hashed:
    seed: int
    value: int


Report = Union[Categorical, Histogram, BitVector, Hashed]


@dataclass(frozen=True, eq=False)
class ReportBlock:
    """
    A batch of reports of one variant, stored column-wise.

    Categorical: values (m,) int
    Histogram:   values (m, d) float
    BitVector:   values (m, d) bool
    Hashed:      seeds (m,) uint64 + values (m,) int
    """
    variant: type
    values: np.ndarray
    seeds: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.values.shape[0])


def pack_reports(reports: Sequence[Report], d: int) -> ReportBlock:
    """Stack homogeneous reports into a ReportBlock; mixed variants are rejected."""
    if not reports:
        raise VariantMismatchError("cannot pack an empty report sequence")

    variant = type(reports[0])
    for r in reports:
        if type(r) is not variant:
            raise VariantMismatchError(
                f"mixed report variants: {variant.__name__} and {type(r).__name__}"
            )

    if variant is Categorical:
        return ReportBlock(Categorical, np.array([r.value for r in reports], dtype=np.int64))
    if variant is Hashed:
        seeds = np.array([int(r.seed) & 0xFFFFFFFFFFFFFFFF for r in reports], dtype=np.uint64)
        values = np.array([r.value for r in reports], dtype=np.int64)
        return ReportBlock(Hashed, values, seeds)

    rows = [r.values if variant is Histogram else r.bits for r in reports]
    for row in rows:
        if np.shape(row) != (d,):
            raise VariantMismatchError(f"report of length {np.shape(row)} for domain size {d}")
    dtype = np.float64 if variant is Histogram else bool
    return ReportBlock(variant, np.asarray(rows, dtype=dtype))


@dataclass(frozen=True, eq=False)
class EstimateVector:
    estimates: np.ndarray
    n: int

    @property
    def d(self) -> int:
        return int(self.estimates.shape[0])

    def __getitem__(self, i: int) -> float:
        return float(self.estimates[i])


# ----------------------------
# Aggregation
# ----------------------------

class SupportCounter(Protocol):
    """What support_count needs from a protocol instance."""

    @property
    def d(self) -> int: ...

    @property
    def report_type(self) -> type: ...

    def count_block(self, block: ReportBlock) -> np.ndarray: ...


def support_count(reports: Sequence[Report], protocol: SupportCounter) -> np.ndarray:
    """
    counts[i] = number of reports whose support set contains i.

    Reports must all be the variant `protocol` produces.
    """
    d = protocol.d
    if len(reports) == 0:
        return np.zeros(d, dtype=np.int64)

    block = pack_reports(reports, d)
    if block.variant is not protocol.report_type:
        raise VariantMismatchError(
            f"{block.variant.__name__} reports cannot be aggregated by a protocol "
            f"producing {protocol.report_type.__name__}"
        )
    return protocol.count_block(block)


def merge_counts(partials: Iterable[np.ndarray], d: int) -> np.ndarray:
    """Sum partial count vectors in the given order."""
    total: Optional[np.ndarray] = None
    for part in partials:
        if part.shape != (d,):
            raise VariantMismatchError(f"partial counts of shape {part.shape}, expected ({d},)")
        total = part.copy() if total is None else total + part
    if total is None:
        return np.zeros(d, dtype=np.int64)
    return total


def estimate(
    support_counts: Union[Sequence[int], np.ndarray],
    n: int,
    params: PureParams,
    d: Optional[int] = None,
) -> EstimateVector:
    """Unbiased count estimates from support counts. Never clamped."""
    counts = np.asarray(support_counts, dtype=np.float64)
    if counts.ndim != 1:
        raise VariantMismatchError(f"support counts must be a vector, got shape {counts.shape}")
    if d is not None and counts.shape[0] != d:
        raise VariantMismatchError(f"support counts of length {counts.shape[0]}, expected {d}")
    if int(n) < 1:
        raise ParameterError(f"report count must be >= 1, got {n}")

    p, q = params.p_star, params.q_star
    est = (counts - n * q) / (p - q)
    return EstimateVector(estimates=est, n=int(n))


def clamp_estimates(ev: EstimateVector) -> EstimateVector:
    """Optional post-processing: clip every estimate into [0, n]."""
    return EstimateVector(estimates=np.clip(ev.estimates, 0.0, float(ev.n)), n=ev.n)


def var_star(params: PureParams) -> float:
    p, q = params.p_star, params.q_star
    return q * (1.0 - q) / (p - q) ** 2


def exact_variance(params: PureParams, n: int, f_i: float) -> float:
    p, q = params.p_star, params.q_star
    return n * q * (1.0 - q) / (p - q) ** 2 + n * f_i * (1.0 - p - q) / (p - q)


def exact_variances(params: PureParams, true_counts: np.ndarray) -> np.ndarray:
    """exact_variance for every value at once, with f_i = true_counts[i] / n."""
    counts = np.asarray(true_counts, dtype=np.float64)
    n = float(counts.sum())
    p, q = params.p_star, params.q_star
    return n * q * (1.0 - q) / (p - q) ** 2 + counts * (1.0 - p - q) / (p - q)
