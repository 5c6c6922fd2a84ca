"""Versioned JSON documents for instances, solutions and impact estimates."""

from __future__ import annotations

import json
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from deleverage.errors import InstanceFormatError, ValidationError
from deleverage.models.market import MarketModel

SCHEMA_VERSION = 1


def _check_square(name: str, rows: list[list[float]], m: int) -> None:
    if len(rows) != m or any(len(row) != m for row in rows):
        raise ValueError(f"{name} must be a row-major {m}x{m} matrix")


class InstanceDocument(BaseModel):
    """Problem instance: impact matrices, portfolio, liability and bound.

    Both matrices are multiplied by ``scale`` on load.
    """

    model_config = ConfigDict(populate_by_name=True, extra="ignore")

    version: int = Field(default=SCHEMA_VERSION, ge=1)
    m: int = Field(ge=1)
    lambda_: list[list[float]] = Field(alias="lambda")
    gamma: list[list[float]]
    p0: list[float]
    x0: list[float]
    l0: float
    rho1: float
    scale: float = Field(default=1.0, gt=0)
    name: str | None = None

    @model_validator(mode="after")
    def _check_dimensions(self) -> InstanceDocument:
        _check_square("lambda", self.lambda_, self.m)
        _check_square("gamma", self.gamma, self.m)
        for field, vec in (("p0", self.p0), ("x0", self.x0)):
            if len(vec) != self.m:
                raise ValueError(f"{field} must have length {self.m}")
        return self

    def to_model(self) -> MarketModel:
        """Build the market model, applying the scale."""
        return MarketModel.from_dict(self.model_dump(by_alias=True))

    @classmethod
    def from_model(
        cls,
        model: MarketModel,
        *,
        scale: float = 1.0,
        name: str | None = None,
    ) -> InstanceDocument:
        """Describe a model; matrices are stored divided by ``scale``."""
        return cls(
            m=model.m,
            lambda_=(model.temp_impact / scale).tolist(),
            gamma=(model.perm_impact / scale).tolist(),
            p0=model.p0.tolist(),
            x0=model.x0.tolist(),
            l0=model.l0,
            rho1=model.rho1,
            scale=scale,
            name=name,
        )


class SolutionDocument(BaseModel):
    """Result of a solve, as written by the command line."""

    model_config = ConfigDict(extra="ignore")

    version: int = SCHEMA_VERSION
    y: list[float]
    equity: float
    leverage_gap: float
    status: str
    eps: float
    nodes: int = 0
    sco_restarts: int = 0
    elapsed_s: float = 0.0
    lower_bound: float | None = None
    objective: float
    global_bound_gap: float | None = None
    algorithm: str
    iterations: int = 0
    sco_iterations: int = 0
    s: int = 0
    q: int = 0
    r: int = 0
    diagnostics: dict[str, Any] | None = None


class FitStatsDocument(BaseModel):
    """Goodness of fit of one asset's regression."""

    asset: int
    r_squared: float | None
    residual_variance: float


class EstimateDocument(BaseModel):
    """Estimated impact matrices, laid out like the instance matrix fields."""

    model_config = ConfigDict(populate_by_name=True)

    version: int = SCHEMA_VERSION
    m: int = Field(ge=1)
    lambda_: list[list[float]] = Field(alias="lambda")
    gamma: list[list[float]]
    scale: float = Field(default=1.0, gt=0)
    intercepts: list[float]
    rows: int
    rank: int
    stats: list[FitStatsDocument]

    @model_validator(mode="after")
    def _check_dimensions(self) -> EstimateDocument:
        _check_square("lambda", self.lambda_, self.m)
        _check_square("gamma", self.gamma, self.m)
        return self


def parse_json(text: str, *, source: str = "<input>") -> Any:
    """Parse JSON text, reporting syntax errors with their position.

    Raises:
        InstanceFormatError: On malformed JSON
    """
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(
            f"{source}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}",
            line=e.lineno,
            column=e.colno,
        ) from None


def load_instance(text: str, *, source: str = "<input>") -> MarketModel:
    """Parse an instance document into a market model.

    Raises:
        InstanceFormatError: On malformed JSON or schema violations
    """
    data = parse_json(text, source=source)
    try:
        document = InstanceDocument.model_validate(data)
        return document.to_model()
    except PydanticValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'document'}: {err['msg']}"
            for err in e.errors()
        )
        raise InstanceFormatError(f"{source}: {problems}") from None
    except ValidationError as e:
        raise InstanceFormatError(f"{source}: {e}") from None


def dump_instance(model: MarketModel, *, scale: float = 1.0, name: str | None = None) -> str:
    """Serialize a model to instance JSON."""
    document = InstanceDocument.from_model(model, scale=scale, name=name)
    return json.dumps(document.model_dump(by_alias=True, exclude_none=True), indent=2)


def matrices_close(a: MarketModel, b: MarketModel, rtol: float = 1e-12) -> bool:
    """Whether two models carry the same data up to a relative tolerance."""
    return (
        a.m == b.m
        and bool(np.allclose(a.temp_impact, b.temp_impact, rtol=rtol, atol=0.0))
        and bool(np.allclose(a.perm_impact, b.perm_impact, rtol=rtol, atol=0.0))
        and bool(np.allclose(a.p0, b.p0, rtol=rtol, atol=0.0))
        and bool(np.allclose(a.x0, b.x0, rtol=rtol, atol=0.0))
        and abs(a.l0 - b.l0) <= rtol * max(1.0, abs(a.l0))
        and abs(a.rho1 - b.rho1) <= rtol * max(1.0, abs(a.rho1))
    )
