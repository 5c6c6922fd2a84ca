"""Data models for deleverage."""

from deleverage.models.market import MarketModel, Strategy, trade_vector
from deleverage.models.reports import (
    CheckResult,
    DiagnosticReport,
    PriorityFlags,
    SolveReport,
    ValidationOutcome,
)
from deleverage.models.types import Algorithm, ScoStatus, SolveStatus, SubStatus

__all__ = [
    # Market data
    "MarketModel",
    "Strategy",
    "trade_vector",
    # Reports
    "CheckResult",
    "ValidationOutcome",
    "PriorityFlags",
    "DiagnosticReport",
    "SolveReport",
    # Enums
    "Algorithm",
    "ScoStatus",
    "SolveStatus",
    "SubStatus",
]
