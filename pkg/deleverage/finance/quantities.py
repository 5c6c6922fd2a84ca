"""Closed-form financial quantities of a trade vector.

All functions are pure and accept either a :class:`Strategy` or any
length-m array-like. Quadratic forms use the matrices as given; only
their symmetric parts matter, so the symmetrized matrices give the same
values.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from deleverage.models.market import MarketModel, Strategy, trade_vector


def liability(model: MarketModel, y: Strategy | ArrayLike) -> float:
    """Liability after trading, l1(y) = l0 + p0ᵀy + yᵀ(Λ + ½Γ)y."""
    v = trade_vector(y, model.m)
    quad = v @ (model.temp_impact + 0.5 * model.perm_impact) @ v
    return float(model.l0 + model.p0 @ v + quad)


def equity(model: MarketModel, y: Strategy | ArrayLike) -> float:
    """Equity after trading, e1(y) = −yᵀ(Λ − ½Γ)y + x0ᵀΓy + e0."""
    v = trade_vector(y, model.m)
    quad = v @ (model.temp_impact - 0.5 * model.perm_impact) @ v
    return float(-quad + model.x0 @ model.perm_impact @ v + model.e0)


def leverage_matrix(model: MarketModel) -> NDArray[np.float64]:
    """Quadratic part of the leverage gap, Λ̂ + ½Γ̂ + ρ1(Λ̂ − ½Γ̂)."""
    lam, gam = model.lam_hat, model.gam_hat
    return lam + 0.5 * gam + model.rho1 * (lam - 0.5 * gam)


def leverage_linear(model: MarketModel) -> NDArray[np.float64]:
    """Linear part of the leverage gap, p0 − ρ1Γx0."""
    return model.p0 - model.rho1 * (model.perm_impact @ model.x0)


def leverage_constant(model: MarketModel) -> float:
    """Constant of the leverage gap, l0 − ρ1e0."""
    return model.l0 - model.rho1 * model.e0


def leverage_gap(model: MarketModel, y: Strategy | ArrayLike) -> float:
    """Leverage gap g(y) = l1(y) − ρ1e1(y); feasible when g(y) ≤ 0."""
    v = trade_vector(y, model.m)
    return float(
        v @ leverage_matrix(model) @ v + leverage_linear(model) @ v + leverage_constant(model)
    )


def objective_matrix(model: MarketModel) -> NDArray[np.float64]:
    """Quadratic part of the objective, Λ̂ − ½Γ̂."""
    return model.lam_hat - 0.5 * model.gam_hat


def objective_linear(model: MarketModel) -> NDArray[np.float64]:
    """Linear part of the objective, −Γᵀx0."""
    return -(model.perm_impact.T @ model.x0)


def objective(model: MarketModel, y: Strategy | ArrayLike) -> float:
    """Equity loss f(y) = yᵀ(Λ̂ − ½Γ̂)y − x0ᵀΓy, so that e1 = e0 − f."""
    v = trade_vector(y, model.m)
    return float(v @ objective_matrix(model) @ v + objective_linear(model) @ v)


def post_trade_prices(model: MarketModel, y: Strategy | ArrayLike) -> NDArray[np.float64]:
    """Prices after the permanent impact settles, p0 + Γy."""
    v = trade_vector(y, model.m)
    return model.p0 + model.perm_impact @ v


def leverage_ratio(model: MarketModel, y: Strategy | ArrayLike) -> float:
    """Debt-to-equity ratio l1(y) / e1(y)."""
    return liability(model, y) / equity(model, y)
