"""deleverage utility functions."""

from deleverage.utils.retry import RetryConfig, with_retry
from deleverage.utils.validation import (
    validate_box,
    validate_positive,
    validate_square_matrix,
    validate_vector,
)

__all__ = [
    # Retry
    "RetryConfig",
    "with_retry",
    # Validation
    "validate_vector",
    "validate_square_matrix",
    "validate_box",
    "validate_positive",
]
