"""Core configuration for deleverage."""

from deleverage.core.config import (
    DEFAULT_EPS,
    DEFAULT_TIME_LIMIT,
    BarrierConfig,
    BnbConfig,
    ReformConfig,
    ScoConfig,
    SolverConfig,
    create_config,
)

__all__ = [
    "DEFAULT_EPS",
    "DEFAULT_TIME_LIMIT",
    "BarrierConfig",
    "BnbConfig",
    "ReformConfig",
    "ScoConfig",
    "SolverConfig",
    "create_config",
]
