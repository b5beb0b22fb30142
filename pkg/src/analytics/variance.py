# src/analytics/variance.py
"""
Closed-form Var*/n of every protocol and the comparison table built from them.

  DE   (d - 2 + e^eps) / (e^eps - 1)^2
  SHE  8 / eps^2
  THE  (2 e^(eps/2) - 1) / (e^(eps/2) - 1)^2          at theta = 1
  SUE  e^(eps/2) / (e^(eps/2) - 1)^2
  OUE  4 e^eps / (e^eps - 1)^2
  BLH  (e^eps + 1)^2 / (e^eps - 1)^2
  OLH  4 e^eps / (e^eps - 1)^2                         continuous g = e^eps + 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

from src.ldp.core import PrivacyBudget, var_star
from src.ldp.errors import ParameterError
from src.ldp.protocols import THETA_TABLE, ProtocolKind, olh_g, the_params

# columns of the comparison table, in print order
TABLE_KINDS = (
    ProtocolKind.SHE,
    ProtocolKind.THE,
    ProtocolKind.SUE,
    ProtocolKind.OUE,
    ProtocolKind.BLH,
    ProtocolKind.OLH,
)


@dataclass(frozen=True)
class VarianceTableRow:
    kind: ProtocolKind
    epsilon: float
    d: Optional[int]
    var_per_user: float
    theta: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.var_per_user > 0:
            raise ParameterError(f"variance must be positive, got {self.var_per_user}")

    @property
    def label(self) -> str:
        if self.kind is ProtocolKind.DE:
            return f"DE(d={self.d})"
        if self.kind is ProtocolKind.THE:
            return f"THE(theta={THETA_TABLE if self.theta is None else self.theta:g})"
        return self.kind.label


def analytic_var(
    kind: Union[str, ProtocolKind],
    epsilon: float,
    d: Optional[int] = None,
    theta: float = THETA_TABLE,
) -> float:
    """Per-user Var* (Var*/n) from the closed forms. d is only read by DE."""
    kind = ProtocolKind.parse(kind)
    eps = PrivacyBudget(epsilon).epsilon
    e = math.exp(eps)

    if kind is ProtocolKind.DE:
        if d is None or d < 2:
            raise ParameterError(f"DE variance needs d >= 2, got {d}")
        return (d - 2 + e) / (e - 1.0) ** 2
    if kind is ProtocolKind.SHE:
        return 8.0 / eps ** 2
    if kind is ProtocolKind.THE:
        if not (0.5 < theta <= 1.0):
            raise ParameterError(f"THE needs 0.5 < theta <= 1, got {theta}")
        if theta == THETA_TABLE:
            h = math.exp(eps / 2.0)
            return (2.0 * h - 1.0) / (h - 1.0) ** 2
        return var_star(the_params(eps, theta))
    if kind is ProtocolKind.SUE:
        h = math.exp(eps / 2.0)
        return h / (h - 1.0) ** 2
    if kind in (ProtocolKind.OUE, ProtocolKind.OLH):
        return 4.0 * e / (e - 1.0) ** 2
    if kind is ProtocolKind.BLH:
        return (e + 1.0) ** 2 / (e - 1.0) ** 2
    raise ParameterError(f"no closed form for {kind!r}")  # pragma: no cover


def olh_integer_var(epsilon: float, g: Optional[int] = None) -> float:
    """OLH Var*/n with the integer g actually used: q*(1-q*)/(p-q*)^2, q* = 1/g."""
    gg = olh_g(epsilon) if g is None else int(g)
    e = math.exp(epsilon)
    p, q_star = e / (e + gg - 1), 1.0 / gg
    return q_star * (1.0 - q_star) / (p - q_star) ** 2


def variance_table(
    epsilons: Sequence[float],
    ds: Sequence[int],
    theta: float = THETA_TABLE,
) -> List[List[VarianceTableRow]]:
    """One list of cells per epsilon: DE for every d, then TABLE_KINDS."""
    table: List[List[VarianceTableRow]] = []
    for eps in epsilons:
        row = [VarianceTableRow(ProtocolKind.DE, eps, d, analytic_var(ProtocolKind.DE, eps, d)) for d in ds]
        for kind in TABLE_KINDS:
            th = theta if kind is ProtocolKind.THE else None
            row.append(VarianceTableRow(kind, eps, None, analytic_var(kind, eps, theta=theta), th))
        table.append(row)
    return table


def communication_bits(kind: Union[str, ProtocolKind], d: int, g: Optional[int] = None) -> int:
    """
    Size of one report in bits: a value for DE, a float per value for HE, a bit
    per value for UE, a 64-bit seed plus a bucket for local hashing.
    """
    kind = ProtocolKind.parse(kind)
    if kind is ProtocolKind.DE:
        return max(1, math.ceil(math.log2(d)))
    if kind in (ProtocolKind.SHE, ProtocolKind.THE):
        return 64 * d
    if kind in (ProtocolKind.SUE, ProtocolKind.OUE):
        return d
    if kind is ProtocolKind.BLH:
        gg = 2
    elif g is None:
        raise ParameterError("OLH report size depends on g")
    else:
        gg = int(g)
    return 64 + max(1, math.ceil(math.log2(gg)))
