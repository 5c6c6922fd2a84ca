"""Least-squares estimation of temporary and permanent cross-impact."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from deleverage.errors import EstimationError
from deleverage.estimation.panel import TradePanel
from deleverage.models.schema import EstimateDocument, FitStatsDocument

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class FitStats:
    """Goodness of fit of one asset's regression.

    ``r_squared`` is None when the price change has no variance.
    """

    asset: int
    r_squared: float | None
    residual_variance: float


@dataclass(frozen=True, slots=True, eq=False)
class ImpactEstimate:
    """Estimated impact matrices.

    Entry (j, i) of either matrix is the effect of trading asset j on the
    price of asset i, so column i comes from asset i's regression.
    """

    lambda_hat: NDArray[np.float64]
    gamma_hat: NDArray[np.float64]
    intercepts: NDArray[np.float64]
    stats: tuple[FitStats, ...]
    rows: int
    rank: int
    coefficients: NDArray[np.float64]
    """Full (2m+1)×m coefficient matrix, intercept row first."""

    @property
    def m(self) -> int:
        """Number of assets."""
        return int(self.intercepts.shape[0])

    def to_document(self, scale: float = 1.0) -> EstimateDocument:
        """Export with matrices divided by ``scale``, as in the instance format."""
        return EstimateDocument(
            m=self.m,
            lambda_=(self.lambda_hat / scale).tolist(),
            gamma=(self.gamma_hat / scale).tolist(),
            scale=scale,
            intercepts=self.intercepts.tolist(),
            rows=self.rows,
            rank=self.rank,
            stats=[
                FitStatsDocument(
                    asset=s.asset,
                    r_squared=s.r_squared,
                    residual_variance=s.residual_variance,
                )
                for s in self.stats
            ],
        )


def design_matrix(panel: TradePanel) -> NDArray[np.float64]:
    """Regressors [1, cumulative volume, bucket volume] per row."""
    return np.hstack([np.ones((panel.rows, 1)), panel.cumulative, panel.volume])


def fit(panel: TradePanel) -> ImpactEstimate:
    """Regress every asset's price change on the cumulative and bucket volumes.

    Uses a rank-revealing least-squares solve; a rank-deficient design
    yields the minimum-norm solution and a warning.

    Raises:
        EstimationError: If the panel has fewer rows than regressors
    """
    m = panel.m
    width = 2 * m + 1
    if panel.rows < width:
        raise EstimationError(f"panel has {panel.rows} rows, need at least {width}")

    design = design_matrix(panel)
    response = panel.price_change
    coef, _, rank, _ = linalg.lstsq(design, response)
    rank = int(rank)
    if rank < width:
        logger.warning("Design matrix has rank %d < %d, using the minimum-norm fit", rank, width)

    resid = response - design @ coef
    rss = np.sum(resid**2, axis=0)
    tss = np.sum((response - response.mean(axis=0)) ** 2, axis=0)
    dof = max(panel.rows - rank, 1)
    stats = tuple(
        FitStats(
            asset=i,
            r_squared=float(1.0 - rss[i] / tss[i]) if tss[i] > 0 else None,
            residual_variance=float(rss[i] / dof),
        )
        for i in range(m)
    )

    return ImpactEstimate(
        lambda_hat=coef[m + 1 :].copy(),
        gamma_hat=coef[1 : m + 1].copy(),
        intercepts=coef[0].copy(),
        stats=stats,
        rows=panel.rows,
        rank=rank,
        coefficients=coef,
    )
