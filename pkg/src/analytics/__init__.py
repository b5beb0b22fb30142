# src/analytics/__init__.py
from .guideline import CommBudget, choose_protocol
from .significance import (
    ThresholdSpec,
    inv_normal_cdf,
    significance_threshold,
    split_ratio,
)
from .variance import VarianceTableRow, analytic_var, variance_table

__all__ = [
    "CommBudget",
    "ThresholdSpec",
    "VarianceTableRow",
    "analytic_var",
    "choose_protocol",
    "inv_normal_cdf",
    "significance_threshold",
    "split_ratio",
    "variance_table",
]
