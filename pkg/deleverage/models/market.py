"""Market data of a deleveraging problem."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from deleverage.errors import ValidationError
from deleverage.utils.validation import validate_square_matrix, validate_vector


def _readonly(arr: NDArray[np.float64]) -> NDArray[np.float64]:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True, eq=False)
class MarketModel:
    """Impact matrices, initial portfolio and leverage requirement.

    Matrices are used as given in the price dynamics p1 = p0 + Γy: no
    symmetry, sign or definiteness is assumed. Financial validity (positive equity,
    over-leverage, feasible full liquidation) is checked by
    :func:`deleverage.finance.validate`, not here; construction only
    enforces shapes and finiteness.
    """

    temp_impact: NDArray[np.float64]
    """Temporary impact matrix Λ (currency per share per unit trading rate)."""

    perm_impact: NDArray[np.float64]
    """Permanent impact matrix Γ (currency per share per share traded)."""

    p0: NDArray[np.float64]
    """Initial prices (currency per share)."""

    x0: NDArray[np.float64]
    """Initial holdings (shares)."""

    l0: float
    """Initial liability (currency)."""

    rho1: float
    """Required debt-to-equity bound after trading."""

    def __post_init__(self) -> None:
        p0 = validate_vector(self.p0, field="p0")
        m = p0.shape[0]
        if m < 1:
            raise ValidationError("model must contain at least one asset", field="p0")
        x0 = validate_vector(self.x0, m, field="x0")
        lam = validate_square_matrix(self.temp_impact, m, field="temp_impact")
        gam = validate_square_matrix(self.perm_impact, m, field="perm_impact")
        for name in ("l0", "rho1"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating)) or not np.isfinite(value):
                raise ValidationError(f"{name} must be a finite real", field=name)
            object.__setattr__(self, name, float(value))

        object.__setattr__(self, "p0", _readonly(p0))
        object.__setattr__(self, "x0", _readonly(x0))
        object.__setattr__(self, "temp_impact", _readonly(lam))
        object.__setattr__(self, "perm_impact", _readonly(gam))

    @property
    def m(self) -> int:
        """Number of assets."""
        return int(self.p0.shape[0])

    @property
    def lam_hat(self) -> NDArray[np.float64]:
        """Symmetric part of the temporary impact matrix."""
        return 0.5 * (self.temp_impact + self.temp_impact.T)

    @property
    def gam_hat(self) -> NDArray[np.float64]:
        """Symmetric part of the permanent impact matrix."""
        return 0.5 * (self.perm_impact + self.perm_impact.T)

    @property
    def e0(self) -> float:
        """Initial equity p0ᵀx0 − l0."""
        return float(self.p0 @ self.x0) - self.l0

    @property
    def initial_leverage(self) -> float:
        """Initial debt-to-equity ratio l0 / e0."""
        return self.l0 / self.e0

    def with_rho1(self, rho1: float) -> MarketModel:
        """Return a copy with a different leverage bound."""
        return replace(self, rho1=float(rho1))

    def with_prices(self, p0: ArrayLike, *, l0: float | None = None) -> MarketModel:
        """Return a copy with different initial prices (and optionally liability)."""
        return replace(self, p0=np.asarray(p0, dtype=np.float64), l0=self.l0 if l0 is None else l0)

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the instance document layout (scale 1)."""
        return {
            "m": self.m,
            "lambda": self.temp_impact.tolist(),
            "gamma": self.perm_impact.tolist(),
            "p0": self.p0.tolist(),
            "x0": self.x0.tolist(),
            "l0": self.l0,
            "rho1": self.rho1,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MarketModel:
        """Create from the instance document layout.

        A ``scale`` entry (default 1) multiplies both impact matrices.
        """
        try:
            scale = float(data.get("scale", 1.0))
            lam = np.asarray(data["lambda"], dtype=np.float64) * scale
            gam = np.asarray(data["gamma"], dtype=np.float64) * scale
            model = cls(
                temp_impact=lam,
                perm_impact=gam,
                p0=np.asarray(data["p0"], dtype=np.float64),
                x0=np.asarray(data["x0"], dtype=np.float64),
                l0=float(data["l0"]),
                rho1=float(data["rho1"]),
            )
        except KeyError as e:
            raise ValidationError(f"missing field {e.args[0]}", field=str(e.args[0])) from None
        except (TypeError, ValueError) as e:
            raise ValidationError(f"malformed instance: {e}") from None

        if "m" in data and int(data["m"]) != model.m:
            raise ValidationError(
                f"m = {data['m']} does not match the data dimension {model.m}",
                field="m",
            )
        return model


@dataclass(frozen=True, slots=True, eq=False)
class Strategy:
    """Cumulative signed trade amounts; negative entries are sales."""

    y: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "y", _readonly(validate_vector(self.y, field="y")))

    @property
    def m(self) -> int:
        """Number of assets."""
        return int(self.y.shape[0])

    def in_box(self, x0: NDArray[np.float64], tol: float = 0.0) -> bool:
        """Whether −x0 − tol ≤ y ≤ tol componentwise."""
        return bool(np.all(self.y <= tol) and np.all(self.y >= -x0 - tol))

    def clipped(self, x0: NDArray[np.float64]) -> Strategy:
        """Project onto the box [−x0, 0]."""
        return Strategy(np.clip(self.y, -x0, 0.0))

    def to_list(self) -> list[float]:
        """Plain list of trade amounts."""
        return [float(v) for v in self.y]


def trade_vector(y: Strategy | ArrayLike, m: int) -> NDArray[np.float64]:
    """Extract a length-m trade vector from a Strategy or array-like.

    Raises:
        ValidationError: On dimension mismatch
    """
    if isinstance(y, Strategy):
        if y.m != m:
            raise ValidationError(f"y must have length {m}, got {y.m}", field="y")
        return y.y
    return validate_vector(y, m, field="y")
