"""Financial quantities, validity checks and diagnostics."""

from deleverage.finance.checks import (
    check_priority_conditions,
    diagnose,
    leverage_must_bind,
    relative_gap,
    validate,
)
from deleverage.finance.quantities import (
    equity,
    leverage_constant,
    leverage_gap,
    leverage_linear,
    leverage_matrix,
    leverage_ratio,
    liability,
    objective,
    objective_linear,
    objective_matrix,
    post_trade_prices,
)

__all__ = [
    # Quantities
    "liability",
    "equity",
    "leverage_gap",
    "objective",
    "leverage_ratio",
    "post_trade_prices",
    "leverage_matrix",
    "leverage_linear",
    "leverage_constant",
    "objective_matrix",
    "objective_linear",
    # Checks
    "validate",
    "check_priority_conditions",
    "leverage_must_bind",
    "diagnose",
    "relative_gap",
]
