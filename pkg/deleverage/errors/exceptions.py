"""Exception hierarchy for deleverage."""

from __future__ import annotations

from typing import Any


class DeleverageError(Exception):
    """Base exception for all deleverage errors."""

    pass


class ConfigurationError(DeleverageError):
    """Invalid configuration.

    Raised when a solver or generator is configured with invalid parameters.
    """

    pass


class ValidationError(DeleverageError):
    """Input validation failed.

    Raised when arguments have the wrong shape or lie outside their domain.
    """

    def __init__(self, message: str, *, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class InfeasibleStartError(ValidationError):
    """A local solve was started from an infeasible point."""

    def __init__(self, message: str, *, violation: float) -> None:
        super().__init__(message, field="z0")
        self.violation = violation


class InvalidModelError(DeleverageError):
    """Market model fails its validity checks.

    Raised when an operation needs a valid model (positive equity,
    over-levered start, full liquidation feasible) and gets one that is not.
    """

    def __init__(self, message: str, *, failed_checks: tuple[str, ...]) -> None:
        super().__init__(message)
        self.failed_checks = failed_checks


class InstanceFormatError(DeleverageError):
    """Instance document could not be parsed.

    Raised for JSON syntax errors (with position) and schema violations.
    """

    def __init__(
        self,
        message: str,
        *,
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        super().__init__(message)
        self.line = line
        self.column = column


class ReformError(DeleverageError):
    """Reformulation failed.

    Raised when an eigendecomposition fails or the congruence construction
    produces ranks inconsistent with the spectral split.
    """

    def __init__(self, message: str, *, diagnostics: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SubproblemError(DeleverageError):
    """A convex subproblem could not be solved.

    Raised by the local and global solvers when the subsolver reports a
    status they cannot continue from.
    """

    def __init__(
        self,
        message: str,
        *,
        status: str,
        iteration: int | None = None,
        retryable: bool = False,
        cause: Exception | None = None,
    ) -> None:
        super().__init__(message)
        self.status = status
        self.iteration = iteration
        self.retryable = retryable
        self.cause = cause


class RetryExhaustedError(DeleverageError):
    """All retry attempts exhausted.

    Raised when an operation fails after all retry attempts.
    """

    def __init__(
        self,
        message: str,
        *,
        attempts: int,
        last_error: Exception | None = None,
    ) -> None:
        super().__init__(message)
        self.attempts = attempts
        self.last_error = last_error


class DegeneratePortfolioError(DeleverageError):
    """The equity-maximizing strategy leaves no positive equity."""

    def __init__(self, message: str, *, equity: float) -> None:
        super().__init__(message)
        self.equity = equity


class GenerationError(DeleverageError):
    """Random instance generation failed.

    Raised when no valid instance is produced within the retry budget.
    """

    def __init__(self, message: str, *, attempts: int) -> None:
        super().__init__(message)
        self.attempts = attempts


class EstimationError(DeleverageError):
    """Impact estimation failed.

    Raised when a panel has too few rows for the regression design or the
    event stream is empty.
    """

    pass
