"""Input validation utilities."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from deleverage.errors import ValidationError


def validate_vector(
    value: ArrayLike,
    length: int | None = None,
    *,
    field: str,
    positive: bool = False,
) -> NDArray[np.float64]:
    """Validate a real vector and convert it to a float array.

    Args:
        value: Vector-like input
        length: Required length (any length if None)
        field: Name reported on failure
        positive: Require every entry to be strictly positive

    Returns:
        Validated 1-D float64 array (a copy)

    Raises:
        ValidationError: If the shape, finiteness or sign is wrong
    """
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError(f"{field} must be a real vector", field=field) from None

    if arr.ndim != 1:
        raise ValidationError(
            f"{field} must be one-dimensional, got shape {arr.shape}",
            field=field,
        )
    if length is not None and arr.shape[0] != length:
        raise ValidationError(
            f"{field} must have length {length}, got {arr.shape[0]}",
            field=field,
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{field} must be finite", field=field)
    if positive and np.any(arr <= 0):
        raise ValidationError(f"{field} must be strictly positive", field=field)
    return arr


def validate_square_matrix(
    value: ArrayLike,
    size: int | None = None,
    *,
    field: str,
) -> NDArray[np.float64]:
    """Validate a real square matrix.

    Args:
        value: Matrix-like input (row-major nested sequences or array)
        size: Required dimension (any if None)
        field: Name reported on failure

    Returns:
        Validated 2-D float64 array (a copy)

    Raises:
        ValidationError: If the matrix is not square, finite and of the right size
    """
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError(f"{field} must be a real matrix", field=field) from None

    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{field} must be square, got shape {arr.shape}", field=field)
    if size is not None and arr.shape[0] != size:
        raise ValidationError(
            f"{field} must be {size}x{size}, got {arr.shape[0]}x{arr.shape[1]}",
            field=field,
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{field} must be finite", field=field)
    return arr


def validate_box(
    lower: ArrayLike,
    upper: ArrayLike,
    length: int,
    *,
    field: str = "box",
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Validate a box [lower, upper].

    Raises:
        ValidationError: If lengths differ or the box is empty
    """
    lo = validate_vector(lower, length, field=f"{field}_l")
    hi = validate_vector(upper, length, field=f"{field}_u")
    if np.any(lo > hi):
        raise ValidationError(f"{field} is empty: lower bound exceeds upper bound", field=field)
    return lo, hi


def validate_positive(value: float, *, field: str) -> float:
    """Validate a strictly positive finite scalar."""
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{field} must be positive and finite, got {value}", field=field)
    return float(value)
