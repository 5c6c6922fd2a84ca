"""deleverage exception hierarchy."""

from deleverage.errors.exceptions import (
    ConfigurationError,
    DegeneratePortfolioError,
    DeleverageError,
    EstimationError,
    GenerationError,
    InfeasibleStartError,
    InstanceFormatError,
    InvalidModelError,
    ReformError,
    RetryExhaustedError,
    SubproblemError,
    ValidationError,
)

__all__ = [
    "DeleverageError",
    "ConfigurationError",
    "ValidationError",
    "InfeasibleStartError",
    "InvalidModelError",
    "InstanceFormatError",
    "ReformError",
    "SubproblemError",
    "RetryExhaustedError",
    "DegeneratePortfolioError",
    "GenerationError",
    "EstimationError",
]
