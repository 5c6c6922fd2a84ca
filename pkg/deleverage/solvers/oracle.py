"""Brute-force grid search over the trade box, for verifying small instances."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from deleverage.errors import ValidationError
from deleverage.finance.quantities import (
    equity,
    leverage_constant,
    leverage_linear,
    leverage_matrix,
    objective_linear,
    objective_matrix,
)
from deleverage.models.market import MarketModel, Strategy

logger = logging.getLogger(__name__)

MAX_GRID_POINTS = 10**8


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Lattice over [−x0, 0] with endpoints included."""

    points_per_dim: int = 101
    chunk_size: int = 1_000_000
    """Grid points evaluated per vectorized batch."""

    def validate(self, m: int) -> int:
        """Check the spec for an m-asset model.

        Returns:
            Total number of grid points

        Raises:
            ValidationError: If fewer than 2 points per axis or the grid
                exceeds the size guard
        """
        if self.points_per_dim < 2:
            raise ValidationError(
                f"points_per_dim must be at least 2, got {self.points_per_dim}",
                field="points_per_dim",
            )
        if self.chunk_size < 1:
            raise ValidationError("chunk_size must be positive", field="chunk_size")
        total = self.points_per_dim**m
        if total > MAX_GRID_POINTS:
            raise ValidationError(
                f"grid of {self.points_per_dim}^{m} points exceeds {MAX_GRID_POINTS}",
                field="points_per_dim",
            )
        return total


def _batch_values(
    model: MarketModel, ys: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    gap = (
        np.einsum("ij,jk,ik->i", ys, leverage_matrix(model), ys)
        + ys @ leverage_linear(model)
        + leverage_constant(model)
    )
    loss = np.einsum("ij,jk,ik->i", ys, objective_matrix(model), ys) + ys @ objective_linear(model)
    return gap, model.e0 - loss


def grid_search(model: MarketModel, spec: GridSpec | None = None) -> tuple[Strategy, float]:
    """Best equity over the feasible grid points.

    Feasibility is the exact test g(y) ≤ 0. When no grid point is feasible
    the full liquidation −x0 is returned.

    Args:
        model: Market model
        spec: Grid description (101 points per axis if None)

    Returns:
        (best strategy, its equity)

    Raises:
        ValidationError: If the grid is too large
    """
    if spec is None:
        spec = GridSpec()
    m = model.m
    total = spec.validate(m)
    shape = (spec.points_per_dim,) * m
    axes = [np.linspace(-float(x), 0.0, spec.points_per_dim) for x in model.x0]

    best_equity = -np.inf
    best: NDArray[np.float64] | None = None
    feasible = 0
    for start in range(0, total, spec.chunk_size):
        flat = np.arange(start, min(total, start + spec.chunk_size))
        index = np.unravel_index(flat, shape)
        ys = np.column_stack([axes[i][index[i]] for i in range(m)])
        gap, eq = _batch_values(model, ys)
        mask = gap <= 0.0
        if not np.any(mask):
            continue
        feasible += int(mask.sum())
        scores = np.where(mask, eq, -np.inf)
        j = int(np.argmax(scores))
        if scores[j] > best_equity:
            best_equity = float(scores[j])
            best = ys[j].copy()

    logger.debug("Grid search: %d of %d points feasible", feasible, total)
    if best is None:
        logger.warning("No feasible grid point, falling back to full liquidation")
        fallback = Strategy(-model.x0)
        return fallback, equity(model, fallback)
    return Strategy(best), best_equity


def lipschitz_bound(model: MarketModel) -> float:
    """Upper bound on the gradient norm of the equity over the trade box."""
    x0 = model.x0
    return float(
        np.linalg.norm(2.0 * objective_matrix(model), 2) * np.linalg.norm(x0)
        + np.linalg.norm(model.perm_impact.T @ x0)
    )


def grid_resolution(model: MarketModel, spec: GridSpec | None = None) -> float:
    """Equity change bound across one grid cell: Lipschitz constant times cell diagonal."""
    if spec is None:
        spec = GridSpec()
    return lipschitz_bound(model) * float(np.linalg.norm(model.x0)) / (spec.points_per_dim - 1)
