"""Impact estimation from trade data."""

from deleverage.estimation.panel import (
    EVENT_COLUMNS,
    TradeEvent,
    TradePanel,
    bucketize,
    events_frame,
    read_events_csv,
    simulate_events,
)
from deleverage.estimation.regression import FitStats, ImpactEstimate, design_matrix, fit

__all__ = [
    "EVENT_COLUMNS",
    "TradeEvent",
    "TradePanel",
    "bucketize",
    "events_frame",
    "read_events_csv",
    "simulate_events",
    "FitStats",
    "ImpactEstimate",
    "design_matrix",
    "fit",
]
