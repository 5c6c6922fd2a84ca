"""Retry utilities with tightening tolerance."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import TypeVar

from deleverage.errors import RetryExhaustedError, SubproblemError

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class RetryConfig:
    """Configuration for retry behavior."""

    max_attempts: int = 4
    """Total attempts, the first one included."""

    tolerance_factor: float = 0.1
    """Multiplier applied to the tolerance before every retry."""

    retryable_exceptions: tuple[type[Exception], ...] = field(
        default_factory=lambda: (SubproblemError,)
    )


def with_retry(
    fn: Callable[[float], T],
    tol: float,
    config: RetryConfig | None = None,
    *,
    on_retry: Callable[[int, Exception], None] | None = None,
) -> T:
    """Call a tolerance-driven function, retrying with a tighter tolerance.

    Exceptions carrying ``retryable=False`` are re-raised immediately.

    Args:
        fn: Function taking the tolerance to use
        tol: Tolerance of the first attempt
        config: Retry configuration (uses defaults if None)
        on_retry: Optional callback called on each retry with (attempt, error)

    Returns:
        Result of the function

    Raises:
        RetryExhaustedError: If all retry attempts fail
        Exception: If a non-retryable exception occurs
    """
    if config is None:
        config = RetryConfig()

    last_error: Exception | None = None

    for attempt in range(1, config.max_attempts + 1):
        try:
            return fn(tol)
        except config.retryable_exceptions as e:
            if not getattr(e, "retryable", True):
                raise
            last_error = e

            if attempt == config.max_attempts:
                break

            if on_retry:
                on_retry(attempt, e)

            tol *= config.tolerance_factor

    raise RetryExhaustedError(
        f"All {config.max_attempts} attempts exhausted",
        attempts=config.max_attempts,
        last_error=last_error,
    )
