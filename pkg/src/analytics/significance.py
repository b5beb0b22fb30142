# src/analytics/significance.py
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.special import ndtr

from src.ldp.core import EstimateVector, PrivacyBudget, PureParams, var_star
from src.ldp.errors import ParameterError
from src.ldp.protocols import ProtocolKind

from .variance import analytic_var

# Acklam's rational approximation (relative error ~1.15e-9), then one Halley
# step against the normal CDF brings it to double precision.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _acklam_lower(p: float) -> float:
    """Quantile for p <= 1/2."""
    if p < _P_LOW:
        t = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5])
                / ((((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0))
    t = p - 0.5
    r = t * t
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * t
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def inv_normal_cdf(p: float) -> float:
    """Standard normal quantile Phi^-1(p) for 0 < p < 1."""
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ParameterError(f"quantile needs 0 < p < 1, got {p}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # 1 - p is exact here, and the lower tail is where ndtr is accurate
        return -inv_normal_cdf(1.0 - p)

    x = _acklam_lower(p)
    e = float(ndtr(x)) - p
    u = e * _SQRT_2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


@dataclass(frozen=True)
class ThresholdSpec:
    d: int
    n: int
    var_per_user: float
    alpha: float = 0.05

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ParameterError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.d < 2 or self.n < 1:
            raise ParameterError(f"threshold needs d >= 2 and n >= 1, got d={self.d}, n={self.n}")
        if not self.var_per_user > 0:
            raise ParameterError(f"variance must be positive, got {self.var_per_user}")

    @property
    def var_star_total(self) -> float:
        return self.var_per_user * self.n

    @classmethod
    def for_protocol(
        cls,
        kind: Union[str, ProtocolKind],
        epsilon: float,
        d: int,
        n: int,
        alpha: float = 0.05,
    ) -> "ThresholdSpec":
        return cls(d=d, n=n, var_per_user=analytic_var(kind, epsilon, d), alpha=alpha)


def significance_threshold(spec: ThresholdSpec) -> float:
    """T_s = Phi^-1(1 - alpha/d) * sqrt(Var*), Bonferroni-corrected over the domain."""
    tail = spec.alpha / spec.d
    if tail >= 1.0:
        raise ParameterError(f"alpha/d must be < 1, got {tail}")
    return inv_normal_cdf(1.0 - tail) * math.sqrt(spec.var_star_total)


def threshold_coefficient(spec: ThresholdSpec) -> float:
    """T_s / sqrt(n)."""
    return significance_threshold(spec) / math.sqrt(spec.n)


def split_ratio(
    epsilon: float,
    kind: Union[str, ProtocolKind] = ProtocolKind.OLH,
    d: int = 2,
) -> float:
    """
    T1 / T2 for answering two questions: T1 splits the budget (eps/2, all n
    users), T2 splits the population (eps, n/2 users). The quantile factor
    cancels, leaving sqrt(2 * var(eps/2) / var(eps)).
    """
    eps = PrivacyBudget(epsilon).epsilon
    return math.sqrt(2.0 * analytic_var(kind, eps / 2.0, d) / analytic_var(kind, eps, d))


def population_split_preferred(ratio: float) -> bool:
    """Splitting users wins when T1 > 2 T2 (each half still sees half the counts)."""
    return ratio > 2.0


def confidence_interval(
    ev: EstimateVector,
    params: PureParams,
    level: float = 0.95,
) -> Tuple[np.ndarray, np.ndarray]:
    """Normal-approximation interval estimate +/- z * sqrt(n * Var*) for every value."""
    if not (0.0 < level < 1.0):
        raise ParameterError(f"level must be in (0, 1), got {level}")
    z = inv_normal_cdf(0.5 + level / 2.0)
    half = z * math.sqrt(ev.n * var_star(params))
    return ev.estimates - half, ev.estimates + half
