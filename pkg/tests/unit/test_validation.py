"""Unit tests for validation and retry utilities."""

import numpy as np
import pytest

from deleverage.errors import RetryExhaustedError, SubproblemError, ValidationError
from deleverage.utils import (
    RetryConfig,
    validate_box,
    validate_positive,
    validate_square_matrix,
    validate_vector,
    with_retry,
)


class TestValidateVector:
    """Tests for validate_vector."""

    def test_valid_list(self) -> None:
        """Test conversion of a list."""
        arr = validate_vector([1, 2, 3], 3, field="x0")
        assert arr.dtype == np.float64
        np.testing.assert_array_equal(arr, [1.0, 2.0, 3.0])

    def test_returns_copy(self) -> None:
        """Test that the input is not aliased."""
        src = np.array([1.0, 2.0])
        arr = validate_vector(src, field="p0")
        arr[0] = 5.0
        assert src[0] == 1.0

    def test_wrong_length(self) -> None:
        """Test length mismatch."""
        with pytest.raises(ValidationError) as exc:
            validate_vector([1.0, 2.0], 3, field="x0")
        assert exc.value.field == "x0"

    def test_not_one_dimensional(self) -> None:
        """Test a matrix passed as a vector."""
        with pytest.raises(ValidationError) as exc:
            validate_vector([[1.0, 2.0]], field="p0")
        assert exc.value.field == "p0"

    def test_non_finite(self) -> None:
        """Test NaN entries."""
        with pytest.raises(ValidationError, match="finite"):
            validate_vector([1.0, np.nan], field="y")

    def test_non_numeric(self) -> None:
        """Test non-numeric entries."""
        with pytest.raises(ValidationError):
            validate_vector(["a", "b"], field="y")

    def test_positive_flag(self) -> None:
        """Test the strict positivity requirement."""
        with pytest.raises(ValidationError, match="positive"):
            validate_vector([1.0, 0.0], field="prices", positive=True)


class TestValidateSquareMatrix:
    """Tests for validate_square_matrix."""

    def test_valid(self) -> None:
        """Test a square matrix."""
        arr = validate_square_matrix([[1, 2], [3, 4]], 2, field="gamma")
        assert arr.shape == (2, 2)

    def test_not_square(self) -> None:
        """Test a rectangular matrix."""
        with pytest.raises(ValidationError) as exc:
            validate_square_matrix([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], field="lambda")
        assert exc.value.field == "lambda"

    def test_wrong_size(self) -> None:
        """Test dimension mismatch."""
        with pytest.raises(ValidationError):
            validate_square_matrix(np.eye(2), 3, field="gamma")

    def test_ragged(self) -> None:
        """Test ragged nested lists."""
        with pytest.raises(ValidationError):
            validate_square_matrix([[1.0, 2.0], [3.0]], field="gamma")


class TestValidateBox:
    """Tests for validate_box."""

    def test_valid(self) -> None:
        """Test a non-empty box."""
        lo, hi = validate_box([-1.0, 0.0], [0.0, 0.0], 2)
        np.testing.assert_array_equal(lo, [-1.0, 0.0])
        np.testing.assert_array_equal(hi, [0.0, 0.0])

    def test_empty(self) -> None:
        """Test lower bound above upper bound."""
        with pytest.raises(ValidationError) as exc:
            validate_box([1.0], [0.0], 1)
        assert exc.value.field == "box"


class TestValidatePositive:
    """Tests for validate_positive."""

    def test_valid(self) -> None:
        """Test a positive value."""
        assert validate_positive(2, field="eps") == 2.0

    @pytest.mark.parametrize("value", [0.0, -1.0, float("inf"), float("nan")])
    def test_invalid(self, value: float) -> None:
        """Test zero, negative and non-finite values."""
        with pytest.raises(ValidationError):
            validate_positive(value, field="eps")


class TestWithRetry:
    """Tests for with_retry."""

    def test_success_first_attempt(self) -> None:
        """Test that the first tolerance is used when it works."""
        seen: list[float] = []

        def fn(tol: float) -> float:
            seen.append(tol)
            return tol

        assert with_retry(fn, 1e-3) == 1e-3
        assert seen == [1e-3]

    def test_tightens_tolerance(self) -> None:
        """Test that every retry multiplies the tolerance."""
        seen: list[float] = []

        def fn(tol: float) -> str:
            seen.append(tol)
            if len(seen) < 3:
                raise SubproblemError("max-iters", status="max-iters", retryable=True)
            return "ok"

        assert with_retry(fn, 1.0, RetryConfig(max_attempts=4, tolerance_factor=0.1)) == "ok"
        assert seen == pytest.approx([1.0, 0.1, 0.01])

    def test_exhausted(self) -> None:
        """Test that the last error is attached when every attempt fails."""

        def fn(tol: float) -> None:
            raise SubproblemError(f"failed at {tol}", status="max-iters", retryable=True)

        with pytest.raises(RetryExhaustedError) as exc:
            with_retry(fn, 1.0, RetryConfig(max_attempts=2))
        assert exc.value.attempts == 2
        assert isinstance(exc.value.last_error, SubproblemError)

    def test_non_retryable_raised_immediately(self) -> None:
        """Test that errors flagged not retryable propagate unchanged."""
        calls = 0

        def fn(tol: float) -> None:
            nonlocal calls
            calls += 1
            raise SubproblemError("broken", status="infeasible", retryable=False)

        with pytest.raises(SubproblemError):
            with_retry(fn, 1.0)
        assert calls == 1

    def test_other_exceptions_propagate(self) -> None:
        """Test that exceptions outside the retryable set are not caught."""

        def fn(tol: float) -> None:
            raise KeyError("x")

        with pytest.raises(KeyError):
            with_retry(fn, 1.0)

    def test_on_retry_callback(self) -> None:
        """Test the retry callback receives the attempt number."""
        attempts: list[int] = []

        def fn(tol: float) -> None:
            raise SubproblemError("x", status="max-iters", retryable=True)

        with pytest.raises(RetryExhaustedError):
            with_retry(
                fn, 1.0, RetryConfig(max_attempts=3), on_retry=lambda a, e: attempts.append(a)
            )
        assert attempts == [1, 2]
