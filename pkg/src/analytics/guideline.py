# src/analytics/guideline.py
from __future__ import annotations

import math
from enum import Enum
from typing import Union

from src.ldp.core import Domain, PrivacyBudget
from src.ldp.protocols import ProtocolKind


class CommBudget(str, Enum):
    UNBOUNDED = "unbounded"
    LOGARITHMIC = "logarithmic"


def de_boundary(epsilon: float) -> float:
    """DE beats OUE/OLH below this domain size."""
    return 3.0 * math.exp(epsilon) + 2.0


def choose_protocol(
    epsilon: float,
    d: int,
    comm_budget: Union[str, CommBudget] = CommBudget.UNBOUNDED,
) -> ProtocolKind:
    """
    DE when d < 3e^eps + 2; otherwise OUE if Theta(d) reports are affordable,
    else OLH (same variance, logarithmic report size).
    """
    eps = PrivacyBudget(epsilon).epsilon
    d = Domain(d).d
    budget = CommBudget(comm_budget)

    if d < de_boundary(eps):
        return ProtocolKind.DE
    if budget is CommBudget.UNBOUNDED:
        return ProtocolKind.OUE
    return ProtocolKind.OLH
