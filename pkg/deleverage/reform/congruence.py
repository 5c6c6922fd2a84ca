"""Congruence transformation to a separable difference-of-convex form.

A nonsingular D with DᵀB⁻D and DᵀA⁻D both diagonal turns the problem in y
into one in z = D⁻¹y whose concave parts are separable:

    f̂(z) = zᵀH⁺z + lin_fᵀz − Σ_{i<s} δᵢzᵢ²
    ĝ(z) = ψ(z) − Σ_{i<r} θᵢzᵢ² − ρ1 Σ_{i<s} δᵢzᵢ²
    ψ(z) = zᵀG⁺z + lin_gᵀz + const_g

The construction follows three steps: an eigendecomposition of B⁻ + A⁻
scaled so the rank-r block becomes the identity, an orthogonal
diagonalization of the leading r×r block of QᵀB⁻Q, and their product.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from deleverage.core.config import ReformConfig
from deleverage.errors import ReformError
from deleverage.finance.quantities import leverage_constant, leverage_linear, objective_linear
from deleverage.models.market import MarketModel, Strategy
from deleverage.reform.spectral import SpectralSplit, spectral_split
from deleverage.utils.validation import validate_vector

logger = logging.getLogger(__name__)

# Diagonal weights this close to 0 or 1 are snapped onto the bound.
_SNAP = 1e-10

# Weights beyond the first s of DᵀB⁻D must vanish to this tolerance.
_RESIDUAL_WEIGHT = 1e-8


def _sym(mat: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (mat + mat.T)


@dataclass(frozen=True, slots=True, eq=False)
class DcReform:
    """The problem in z-coordinates, y = Dz."""

    model: MarketModel
    d: NDArray[np.float64]
    d_inv: NDArray[np.float64]
    delta: NDArray[np.float64]
    """Concave weights of the objective, length s, in (0, 1]."""

    theta: NDArray[np.float64]
    """Concave weights of the liability, length r, in [0, 1]."""

    s: int
    q: int
    r: int
    h_plus: NDArray[np.float64]
    g_plus: NDArray[np.float64]
    lin_f: NDArray[np.float64]
    lin_g: NDArray[np.float64]
    const_g: float
    z_lo: NDArray[np.float64]
    z_hi: NDArray[np.float64]
    cond: float
    """Condition number of D."""

    @property
    def m(self) -> int:
        """Number of assets."""
        return self.model.m

    @property
    def rho1(self) -> float:
        """Leverage bound of the underlying model."""
        return self.model.rho1

    @property
    def convex(self) -> bool:
        """Whether no concave part remains (nothing to branch on)."""
        return self.r == 0

    @property
    def ranks(self) -> tuple[int, int, int]:
        """(s, q, r)."""
        return self.s, self.q, self.r

    def _concave(self, z: NDArray[np.float64]) -> tuple[float, float]:
        sq = z[: self.r] ** 2
        return float(self.delta @ sq[: self.s]), float(self.theta @ sq)

    def psi(self, z: ArrayLike) -> float:
        """Convex part of the leverage gap."""
        v = validate_vector(z, self.m, field="z")
        return float(v @ self.g_plus @ v + self.lin_g @ v + self.const_g)

    def f_hat(self, z: ArrayLike) -> float:
        """Objective in z-coordinates."""
        v = validate_vector(z, self.m, field="z")
        obj_concave, _ = self._concave(v)
        return float(v @ self.h_plus @ v + self.lin_f @ v) - obj_concave

    def g_hat(self, z: ArrayLike) -> float:
        """Leverage gap in z-coordinates."""
        v = validate_vector(z, self.m, field="z")
        obj_concave, liab_concave = self._concave(v)
        return self.psi(v) - liab_concave - self.rho1 * obj_concave

    def f_hat_grad(self, z: ArrayLike) -> NDArray[np.float64]:
        """Gradient of f̂."""
        v = validate_vector(z, self.m, field="z")
        grad = 2.0 * (self.h_plus @ v) + self.lin_f
        grad[: self.s] -= 2.0 * self.delta * v[: self.s]
        return grad

    def g_hat_grad(self, z: ArrayLike) -> NDArray[np.float64]:
        """Gradient of ĝ."""
        v = validate_vector(z, self.m, field="z")
        grad = 2.0 * (self.g_plus @ v) + self.lin_g
        grad[: self.r] -= 2.0 * self.theta * v[: self.r]
        grad[: self.s] -= 2.0 * self.rho1 * self.delta * v[: self.s]
        return grad

    def to_z(self, y: Strategy | ArrayLike) -> NDArray[np.float64]:
        """Map a trade vector to z = D⁻¹y."""
        v = y.y if isinstance(y, Strategy) else validate_vector(y, self.m, field="y")
        return self.d_inv @ v

    def to_strategy(self, z: ArrayLike) -> Strategy:
        """Map z back to the trade vector y = Dz (not clipped)."""
        return Strategy(self.d @ validate_vector(z, self.m, field="z"))

    def start_point(self) -> NDArray[np.float64]:
        """The image of full liquidation, D⁻¹(−x0)."""
        return self.d_inv @ (-self.model.x0)

    def box_violation(self, z: ArrayLike) -> float:
        """Largest violation of −x0 ≤ Dz ≤ 0, relative to max(1, x0ᵢ)."""
        y = self.d @ validate_vector(z, self.m, field="z")
        x0 = self.model.x0
        excess = np.maximum(y, -x0 - y) / np.maximum(1.0, x0)
        return float(max(0.0, np.max(excess)))

    def summary(self) -> dict[str, Any]:
        """Debug dump of the transformation."""
        return {
            "m": self.m,
            "s": self.s,
            "q": self.q,
            "r": self.r,
            "convex": self.convex,
            "cond_d": self.cond,
            "delta": self.delta.tolist(),
            "theta": self.theta.tolist(),
            "z_lo": self.z_lo.tolist(),
            "z_hi": self.z_hi.tolist(),
            "d": self.d.tolist(),
        }


def f_hat(reform: DcReform, z: ArrayLike) -> float:
    """Objective of the transformed problem at z."""
    return reform.f_hat(z)


def g_hat(reform: DcReform, z: ArrayLike) -> float:
    """Leverage gap of the transformed problem at z."""
    return reform.g_hat(z)


def to_strategy(reform: DcReform, z: ArrayLike) -> Strategy:
    """Trade vector y = Dz of a transformed point."""
    return reform.to_strategy(z)


def simultaneous_diagonalize(
    split: SpectralSplit,
    config: ReformConfig | None = None,
) -> DcReform:
    """Build the congruence D and the transformed problem data.

    Args:
        split: Spectral split of the model's quadratics
        config: Reformulation settings (uses defaults if None)

    Returns:
        DcReform with all derived matrices and z-bounds

    Raises:
        ReformError: If the rank of B⁻ + A⁻ or the diagonal weights are
            inconsistent with (s, q)
    """
    if config is None:
        config = ReformConfig()

    model = split.model
    m, s, q = model.m, split.s, split.q
    b_minus, a_minus = split.b_minus, split.a_minus

    if s == 0 and q == 0:
        d = np.eye(m)
        r = 0
        delta = np.zeros(0)
        theta = np.zeros(0)
    else:
        try:
            vals, vecs = np.linalg.eigh(_sym(b_minus + a_minus))
        except np.linalg.LinAlgError as e:
            raise ReformError(f"eigendecomposition of B- + A- failed: {e}") from e
        order = np.argsort(-vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        norm = float(np.max(np.abs(vals)))
        r = int(np.sum(vals > config.tol_zero * norm))

        diagnostics: dict[str, Any] = {
            "s": s,
            "q": q,
            "r": r,
            "eigenvalues": vals.tolist(),
        }
        if not max(s, q) <= r <= s + q:
            raise ReformError(
                f"rank of B- + A- is {r}, inconsistent with s = {s}, q = {q}",
                diagnostics=diagnostics,
            )

        scale = np.ones(m)
        scale[:r] = vals[:r] ** -0.5
        q_mat = vecs * scale

        block = _sym((q_mat.T @ b_minus @ q_mat)[:r, :r])
        weights, rot = np.linalg.eigh(block)
        order = np.argsort(-weights, kind="stable")
        rot = rot[:, order]

        d = q_mat.copy()
        d[:, :r] = q_mat[:, :r] @ rot

        diag_b = np.diag(d.T @ b_minus @ d).copy()
        diag_a = np.diag(d.T @ a_minus @ d).copy()
        diagnostics["weights"] = diag_b[:r].tolist()

        if s > 0 and diag_b[s - 1] <= _SNAP:
            raise ReformError(
                f"only {int(np.sum(diag_b[:r] > _SNAP))} positive weights, expected s = {s}",
                diagnostics=diagnostics,
            )
        if r > s and np.max(np.abs(diag_b[s:r])) > _RESIDUAL_WEIGHT:
            raise ReformError(
                "weights beyond the first s do not vanish",
                diagnostics=diagnostics,
            )

        delta = np.clip(diag_b[:s], 0.0, 1.0)
        delta[delta >= 1.0 - _SNAP] = 1.0
        theta = np.clip(diag_a[:r], 0.0, 1.0)
        theta[theta <= _SNAP] = 0.0

        nonzero = int(np.count_nonzero(theta))
        if nonzero != q:
            diagnostics["theta"] = theta.tolist()
            raise ReformError(
                f"{nonzero} nonzero liability weights, expected q = {q}",
                diagnostics=diagnostics,
            )

    try:
        d_inv = np.linalg.inv(d)
    except np.linalg.LinAlgError as e:
        raise ReformError("congruence matrix is singular") from e
    cond = float(np.linalg.cond(d))
    if cond > config.cond_warning:
        logger.warning("Congruence matrix is ill-conditioned: cond(D) = %.3e", cond)

    x0, rho1 = model.x0, model.rho1
    z_lo = -(np.clip(d_inv, 0.0, None) @ x0)
    z_hi = -(np.clip(d_inv, None, 0.0) @ x0)

    logger.debug("Reformulated with s=%d q=%d r=%d cond(D)=%.3e", s, q, r, cond)

    return DcReform(
        model=model,
        d=d,
        d_inv=d_inv,
        delta=delta,
        theta=theta,
        s=s,
        q=q,
        r=r,
        h_plus=_sym(d.T @ split.b_plus @ d),
        g_plus=_sym(d.T @ (split.a_plus + rho1 * split.b_plus) @ d),
        lin_f=d.T @ objective_linear(model),
        lin_g=d.T @ leverage_linear(model),
        const_g=leverage_constant(model),
        z_lo=z_lo,
        z_hi=z_hi,
        cond=cond,
    )


def reformulate(model: MarketModel, config: ReformConfig | None = None) -> DcReform:
    """Split and diagonalize in one call."""
    return simultaneous_diagonalize(spectral_split(model, config), config)
