# src/ldp/protocols.py
"""
Encode / Perturb / Support for the frequency-oracle protocols:

  DE   direct encoding (generalised randomized response over [d])
  SHE  histogram encoding, aggregated by summing noisy counts (not pure)
  THE  histogram encoding, thresholded at theta
  SUE  unary encoding with p + q = 1 (basic RAPPOR)
  OUE  unary encoding with p = 1/2, q = 1/(e^eps + 1)
  BLH  local hashing into g = 2 buckets
  OLH  local hashing into g = round(e^eps) + 1 buckets

Every perturbation takes an explicit numpy Generator. The single-user functions
(de_perturb, ue_perturb, ...) return one Report; ProtocolSpec.perturb_block does
the same for a whole block of users and ProtocolSpec.count_block folds a block
of reports into support counts.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .core import (
    BitVector,
    Categorical,
    Domain,
    EstimateVector,
    Hashed,
    Histogram,
    PrivacyBudget,
    PureParams,
    ReportBlock,
    pack_reports,
    var_star,
)
from .errors import DomainError, NotPureError, ParameterError, VariantMismatchError
from .hash_utils import MAX_G, draw_seeds, hash_values, lh_hash

logger = logging.getLogger(__name__)

THETA_TABLE = 1.0  # the "THE (theta=1)" column of the comparison table
THETA_XATOL = 1e-6

# users per block: DE is cheap per user; the d-wide protocols are sized so a
# block holds about 2^20 cells
_DE_BLOCK = 1 << 16
_BLOCK_CELLS = 1 << 20
_MIN_BLOCK = 64


class ProtocolKind(str, Enum):
    DE = "de"
    SHE = "she"
    THE = "the"
    SUE = "sue"
    OUE = "oue"
    BLH = "blh"
    OLH = "olh"

    @classmethod
    def parse(cls, name: Union[str, "ProtocolKind"]) -> "ProtocolKind":
        if isinstance(name, ProtocolKind):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ParameterError(f"unknown protocol {name!r} (choose from {choices})") from None

    @property
    def label(self) -> str:
        return self.value.upper()


PURE_KINDS = (
    ProtocolKind.DE,
    ProtocolKind.THE,
    ProtocolKind.SUE,
    ProtocolKind.OUE,
    ProtocolKind.BLH,
    ProtocolKind.OLH,
)
UE_KINDS = (ProtocolKind.SUE, ProtocolKind.OUE)
HE_KINDS = (ProtocolKind.SHE, ProtocolKind.THE)
LH_KINDS = (ProtocolKind.BLH, ProtocolKind.OLH)


# ----------------------------
# Parameter derivation
# ----------------------------

def ue_params(kind: Union[str, ProtocolKind], epsilon: float) -> Tuple[float, float]:
    kind = ProtocolKind.parse(kind)
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    if kind is ProtocolKind.SUE:
        half = math.exp(epsilon / 2.0)
        return half / (half + 1.0), 1.0 / (half + 1.0)
    if kind is ProtocolKind.OUE:
        return 0.5, 1.0 / (math.exp(epsilon) + 1.0)
    raise ParameterError(f"{kind.label} is not a unary-encoding protocol")


def sue_from_rappor_f(f: float) -> Tuple[float, float, float]:
    """
    Basic RAPPOR's flip parameter f as SUE parameters: (p, q, epsilon) with
    p = 1 - f/2, q = f/2 and epsilon = 2 ln(p/q).
    """
    if not (0.0 < f < 1.0):
        raise ParameterError(f"f must be in (0, 1), got {f}")
    p, q = 1.0 - f / 2.0, f / 2.0
    return p, q, 2.0 * math.log(p / q)


def olh_g(epsilon: float) -> int:
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    return max(2, int(round(math.exp(epsilon))) + 1)


def the_params(epsilon: float, theta: float) -> PureParams:
    """p* = 1 - F(theta - 1), q* = 1 - F(theta) for the Laplace(2/eps) CDF F, 0 <= theta <= 1."""
    if not (0.0 <= theta <= 1.0):
        raise ParameterError(f"theta must be in [0, 1] for the closed form, got {theta}")
    p_star = 1.0 - 0.5 * math.exp(epsilon * (theta - 1.0) / 2.0)
    q_star = 0.5 * math.exp(-epsilon * theta / 2.0)
    return PureParams(p_star, q_star)


def the_optimal_theta(epsilon: Union[float, PrivacyBudget]) -> float:
    """theta in (1/2, 1] minimising Var* of THE, by bounded scalar minimisation."""
    eps = epsilon.epsilon if isinstance(epsilon, PrivacyBudget) else PrivacyBudget(epsilon).epsilon

    res = minimize_scalar(
        lambda t: var_star(the_params(eps, t)),
        bounds=(0.5, 1.0),
        method="bounded",
        options={"xatol": THETA_XATOL},
    )
    theta = float(min(max(res.x, np.nextafter(0.5, 1.0)), 1.0))
    logger.debug("optimal theta at eps=%s: %.7f (Var*=%.6f)", eps, theta, res.fun)
    return theta


# ----------------------------
# Protocol instance
# ----------------------------

@dataclass(frozen=True)
class ProtocolSpec:
    kind: ProtocolKind
    budget: PrivacyBudget
    domain: Domain
    p: Optional[float] = None
    q: Optional[float] = None
    g: Optional[int] = None
    theta: Optional[float] = None
    params: Optional[PureParams] = None

    @classmethod
    def build(
        cls,
        kind: Union[str, ProtocolKind],
        epsilon: Union[float, PrivacyBudget],
        d: Union[int, Domain],
        theta: Optional[float] = None,
        g: Optional[int] = None,
    ) -> "ProtocolSpec":
        """
        Derive every protocol parameter from (kind, epsilon, d).

        theta: THE only; defaults to the_optimal_theta(epsilon).
        g:     OLH only; defaults to olh_g(epsilon). BLH always uses g = 2.
        """
        kind = ProtocolKind.parse(kind)
        budget = epsilon if isinstance(epsilon, PrivacyBudget) else PrivacyBudget(epsilon)
        domain = d if isinstance(d, Domain) else Domain(d)
        eps = budget.epsilon
        e = budget.exp_eps

        if theta is not None and kind is not ProtocolKind.THE:
            raise ParameterError(f"theta only applies to THE, not {kind.label}")
        if g is not None and kind not in LH_KINDS:
            raise ParameterError(f"g only applies to BLH/OLH, not {kind.label}")

        if kind is ProtocolKind.DE:
            p, q = e / (e + domain.d - 1), 1.0 / (e + domain.d - 1)
            return cls(kind, budget, domain, p=p, q=q, params=PureParams(p, q))

        if kind is ProtocolKind.SHE:
            return cls(kind, budget, domain)

        if kind is ProtocolKind.THE:
            th = the_optimal_theta(budget) if theta is None else float(theta)
            if not (0.5 < th <= 1.0):
                raise ParameterError(f"THE needs 0.5 < theta <= 1, got {th}")
            return cls(kind, budget, domain, theta=th, params=the_params(eps, th))

        if kind in UE_KINDS:
            p, q = ue_params(kind, eps)
            return cls(kind, budget, domain, p=p, q=q, params=PureParams(p, q))

        if kind is ProtocolKind.BLH:
            if g is not None and int(g) != 2:
                raise ParameterError(f"BLH fixes g = 2, got g={g}")
            gg = 2
        else:
            gg = olh_g(eps) if g is None else int(g)
        if gg < 2 or gg > MAX_G:
            raise ParameterError(f"g must be in [2, 2^32], got {gg}")
        p, q = e / (e + gg - 1), 1.0 / (e + gg - 1)
        return cls(kind, budget, domain, p=p, q=q, g=gg, params=PureParams(p, 1.0 / gg))

    @property
    def epsilon(self) -> float:
        return self.budget.epsilon

    @property
    def d(self) -> int:
        return self.domain.d

    @property
    def is_pure(self) -> bool:
        return self.params is not None

    @property
    def report_type(self) -> type:
        if self.kind is ProtocolKind.DE:
            return Categorical
        if self.kind in HE_KINDS:
            return Histogram
        if self.kind in UE_KINDS:
            return BitVector
        return Hashed

    @property
    def laplace_scale(self) -> float:
        return 2.0 / self.epsilon

    def pure_params(self) -> PureParams:
        if self.params is None:
            raise NotPureError(f"{self.kind.label} is not a pure protocol and has no (p*, q*)")
        return self.params

    def var_star(self) -> float:
        """Per-user Var*/n of this instance; SHE's is 8/eps^2."""
        if self.kind is ProtocolKind.SHE:
            return 8.0 / self.epsilon ** 2
        return var_star(self.pure_params())

    def block_size(self) -> int:
        if self.kind is ProtocolKind.DE:
            return _DE_BLOCK
        return max(_MIN_BLOCK, min(_DE_BLOCK, _BLOCK_CELLS // self.d))

    def describe(self) -> str:
        parts = [f"{self.kind.label} eps={self.epsilon:g} d={self.d}"]
        if self.p is not None:
            parts.append(f"p={self.p:.6g} q={self.q:.6g}")
        if self.g is not None:
            parts.append(f"g={self.g}")
        if self.theta is not None:
            parts.append(f"theta={self.theta:.6f}")
        if self.params is not None:
            parts.append(f"p*={self.params.p_star:.6g} q*={self.params.q_star:.6g}")
        return " ".join(parts)

    # --- single user ---

    def perturb(self, v: int, rng: np.random.Generator):
        if self.kind is ProtocolKind.DE:
            return de_perturb(v, self, rng)
        if self.kind in HE_KINDS:
            return he_encode_perturb(v, self, rng)
        if self.kind in UE_KINDS:
            return ue_perturb(self.domain.check(v), self.p, self.q, rng, d=self.d)
        return lh_encode_perturb(v, self, rng)

    # --- blocks of users ---

    def perturb_block(self, values: np.ndarray, rng: np.random.Generator) -> ReportBlock:
        """Perturb one block of user values (ints in [d]) into a ReportBlock."""
        v = np.asarray(values, dtype=np.int64)
        if v.size and (v.min() < 0 or v.max() >= self.d):
            raise DomainError(f"block holds values outside [0, {self.d})")
        m = v.shape[0]

        if self.kind is ProtocolKind.DE:
            return ReportBlock(Categorical, grr_block(v, self.d, self.p, rng))

        if self.kind in HE_KINDS:
            noisy = laplace_noise(rng, self.laplace_scale, (m, self.d))
            noisy[np.arange(m), v] += 1.0
            return ReportBlock(Histogram, noisy)

        if self.kind in UE_KINDS:
            bits = rng.random((m, self.d)) < self.q
            bits[np.arange(m), v] = rng.random(m) < self.p
            return ReportBlock(BitVector, bits)

        seeds = draw_seeds(rng, m)
        hashed = hash_values(seeds, v, self.g).astype(np.int64)
        return ReportBlock(Hashed, grr_block(hashed, self.g, self.p, rng), seeds)

    def count_block(self, block: ReportBlock) -> np.ndarray:
        """
        Support counts of one block. For SHE (no support function) this is the
        per-value sum of noisy counts instead.
        """
        if block.variant is not self.report_type:
            raise VariantMismatchError(
                f"{self.kind.label} cannot aggregate {block.variant.__name__} reports"
            )
        d = self.d

        if self.kind is ProtocolKind.DE:
            vals = block.values
            if vals.size and (vals.min() < 0 or vals.max() >= d):
                raise VariantMismatchError(f"categorical report outside [0, {d})")
            return np.bincount(vals, minlength=d).astype(np.int64)

        if block.variant in (Histogram, BitVector) and block.values.shape[1:] != (d,):
            raise VariantMismatchError(
                f"reports of width {block.values.shape[1:]} for domain size {d}"
            )

        if self.kind is ProtocolKind.SHE:
            return block.values.sum(axis=0)
        if self.kind is ProtocolKind.THE:
            return the_support(block.values, self.theta).sum(axis=0).astype(np.int64)
        if self.kind in UE_KINDS:
            return block.values.sum(axis=0).astype(np.int64)

        return lh_support_counts(block.seeds, block.values, d, self.g)


# ----------------------------
# Randomizers
# ----------------------------

def grr_block(x: np.ndarray, k: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """
    Generalised randomized response over [k]: keep x with probability p,
    otherwise a uniformly chosen different value.
    """
    m = x.shape[0]
    keep = rng.random(m) < p
    other = rng.integers(0, k - 1, size=m)
    other = other + (other >= x)
    return np.where(keep, x, other)


def _grr_one(x: int, k: int, p: float, rng: np.random.Generator) -> int:
    if rng.random() < p:
        return x
    r = int(rng.integers(0, k - 1))
    return r if r < x else r + 1


def open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    """Uniform draws on the open interval (0, 1): (k + 1/2) / 2^53 for k uniform in [0, 2^53)."""
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k + 0.5) / float(1 << 53)


def laplace_noise(rng: np.random.Generator, scale: float, size) -> np.ndarray:
    """
    Laplace(0, scale) by inverse CDF from one uniform u in (0, 1):
        x = -scale * sign(u - 1/2) * ln(1 - 2|u - 1/2|)
    """
    c = open_uniform(rng, size) - 0.5
    return -scale * np.sign(c) * np.log1p(-2.0 * np.abs(c))


def de_perturb(v: int, spec: ProtocolSpec, rng: np.random.Generator) -> Categorical:
    if spec.kind is not ProtocolKind.DE:
        raise ParameterError(f"de_perturb needs a DE spec, got {spec.kind.label}")
    v = spec.domain.check(v)
    return Categorical(_grr_one(v, spec.d, spec.p, rng))


def he_encode_perturb(v: int, spec: ProtocolSpec, rng: np.random.Generator) -> Histogram:
    if spec.kind not in HE_KINDS:
        raise ParameterError(f"histogram encoding needs SHE/THE, got {spec.kind.label}")
    v = spec.domain.check(v)
    noisy = laplace_noise(rng, spec.laplace_scale, spec.d)
    noisy[v] += 1.0
    return Histogram(noisy)


def she_aggregate(reports, d: Optional[int] = None) -> EstimateVector:
    """SHE estimate: the plain per-value sum of noisy counts."""
    if len(reports) == 0:
        raise VariantMismatchError("SHE aggregation needs at least one report")
    first = reports[0]
    if not isinstance(first, Histogram):
        raise VariantMismatchError(f"SHE aggregates Histogram reports, got {type(first).__name__}")
    block = pack_reports(reports, d if d is not None else int(np.shape(first.values)[0]))
    return EstimateVector(estimates=block.values.sum(axis=0), n=len(block))


def the_support(report: Union[Histogram, np.ndarray], theta: float) -> np.ndarray:
    """Membership mask: value i is supported iff report[i] > theta."""
    values = report.values if isinstance(report, Histogram) else np.asarray(report)
    return values > theta


def ue_perturb(
    v: int,
    p: float,
    q: float,
    rng: np.random.Generator,
    d: Optional[int] = None,
) -> BitVector:
    """Bit v is 1 with probability p, every other bit with probability q, independently."""
    if not (0.0 <= q <= 1.0 and 0.0 <= p <= 1.0):
        raise ParameterError(f"p and q must be probabilities, got p={p}, q={q}")
    if d is None:
        raise ParameterError("ue_perturb needs the domain size d")
    v = Domain(d).check(v)
    bits = rng.random(d) < q
    bits[v] = rng.random() < p
    return BitVector(bits)


def lh_encode_perturb(v: int, spec: ProtocolSpec, rng: np.random.Generator) -> Hashed:
    if spec.kind not in LH_KINDS:
        raise ParameterError(f"local hashing needs BLH/OLH, got {spec.kind.label}")
    v = spec.domain.check(v)
    seed = int(draw_seeds(rng, 1)[0])
    x = lh_hash(seed, v, spec.g)
    return Hashed(seed=seed, value=_grr_one(x, spec.g, spec.p, rng))


def lh_support_counts(seeds: np.ndarray, reported: np.ndarray, d: int, g: int) -> np.ndarray:
    """
    counts[v] = #{j : H_{seed_j}(v) == y_j}. Support sets are never built; every
    value is re-hashed under every report's seed, in chunks of values.
    """
    counts = np.zeros(d, dtype=np.int64)
    m = seeds.shape[0]
    if m == 0:
        return counts

    step = max(1, _BLOCK_CELLS // m)
    s = seeds[:, None]
    y = np.asarray(reported, dtype=np.int64)[:, None]
    for lo in range(0, d, step):
        vals = np.arange(lo, min(d, lo + step), dtype=np.int64)
        hv = hash_values(s, vals[None, :], g).astype(np.int64)
        counts[lo:lo + vals.shape[0]] = (hv == y).sum(axis=0)
    return counts


def lh_support(report: Hashed, d: int, g: int) -> np.ndarray:
    """Membership mask over [d] for one hashed report."""
    hv = hash_values(int(report.seed), np.arange(d, dtype=np.int64), g).astype(np.int64)
    return hv == int(report.value)
