# src/ldp/__init__.py
from .core import (
    BitVector,
    Categorical,
    Domain,
    EstimateVector,
    Hashed,
    Histogram,
    PrivacyBudget,
    PureParams,
    estimate,
    exact_variance,
    support_count,
    var_star,
)
from .protocols import ProtocolKind, ProtocolSpec

__all__ = [
    "BitVector",
    "Categorical",
    "Domain",
    "EstimateVector",
    "Hashed",
    "Histogram",
    "PrivacyBudget",
    "ProtocolKind",
    "ProtocolSpec",
    "PureParams",
    "estimate",
    "exact_variance",
    "support_count",
    "var_star",
]
