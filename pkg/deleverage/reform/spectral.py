"""Spectral splitting of the symmetrized impact quadratics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from deleverage.core.config import ReformConfig
from deleverage.errors import ReformError
from deleverage.finance.quantities import objective_matrix
from deleverage.models.market import MarketModel


@dataclass(frozen=True, slots=True, eq=False)
class SpectralSplit:
    """PSD parts of Λ̂ − ½Γ̂ = B⁺ − B⁻ and Λ̂ + ½Γ̂ = A⁺ − A⁻."""

    model: MarketModel
    b_plus: NDArray[np.float64]
    b_minus: NDArray[np.float64]
    a_plus: NDArray[np.float64]
    a_minus: NDArray[np.float64]
    s: int
    """Number of negative eigenvalues of Λ̂ − ½Γ̂."""

    q: int
    """Number of negative eigenvalues of Λ̂ + ½Γ̂."""

    tol_zero: float = 1e-10

    @property
    def convex(self) -> bool:
        """Whether both quadratics are already PSD."""
        return self.s == 0 and self.q == 0


def split_psd(
    matrix: NDArray[np.float64],
    tol_zero: float,
    *,
    name: str = "matrix",
) -> tuple[NDArray[np.float64], NDArray[np.float64], int]:
    """Split a symmetric matrix into PSD parts, M = P − N.

    Eigenvalues with |λ| ≤ tol_zero·‖M‖₂ stay in P.

    Returns:
        (P, N, rank of N)

    Raises:
        ReformError: If the eigensolver does not converge
    """
    sym = 0.5 * (matrix + matrix.T)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as e:
        raise ReformError(
            f"eigendecomposition of {name} failed: {e}",
            diagnostics={"matrix": name, "shape": list(sym.shape)},
        ) from e

    norm = float(np.max(np.abs(vals))) if vals.size else 0.0
    negative = vals < -tol_zero * norm
    keep = ~negative

    plus = (vecs[:, keep] * vals[keep]) @ vecs[:, keep].T
    minus = (vecs[:, negative] * -vals[negative]) @ vecs[:, negative].T
    return 0.5 * (plus + plus.T), 0.5 * (minus + minus.T), int(negative.sum())


def spectral_split(model: MarketModel, config: ReformConfig | None = None) -> SpectralSplit:
    """Split the objective and liability quadratics into PSD parts.

    Args:
        model: Market model
        config: Reformulation settings (uses defaults if None)

    Returns:
        SpectralSplit with s = rank(B⁻) and q = rank(A⁻)

    Raises:
        ReformError: If an eigendecomposition fails
    """
    if config is None:
        config = ReformConfig()

    obj = objective_matrix(model)
    liab = model.lam_hat + 0.5 * model.gam_hat
    b_plus, b_minus, s = split_psd(obj, config.tol_zero, name="objective quadratic")
    a_plus, a_minus, q = split_psd(liab, config.tol_zero, name="liability quadratic")

    return SpectralSplit(
        model=model,
        b_plus=b_plus,
        b_minus=b_minus,
        a_plus=a_plus,
        a_minus=a_minus,
        s=s,
        q=q,
        tol_zero=config.tol_zero,
    )
