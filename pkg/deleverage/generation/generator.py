"""Random instances with prescribed negative-eigenvalue counts."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from deleverage.core.config import ReformConfig
from deleverage.errors import ConfigurationError, GenerationError
from deleverage.finance.checks import validate
from deleverage.models.market import MarketModel
from deleverage.reform.spectral import spectral_split

logger = logging.getLogger(__name__)

BIT_GENERATOR = "PCG64"
"""Bit generator behind every draw; instances are reproducible given the seed."""

MAX_ATTEMPTS = 100


@dataclass(frozen=True, slots=True)
class GenSpec:
    """Parameters of a random instance.

    ``s`` and ``q`` are the numbers of negative eigenvalues of the
    objective and liability quadratics; 0 for both gives a convex instance.
    """

    m: int
    s: int = 1
    q: int = 1
    entry_range: tuple[float, float] = (1e-6, 1e-5)
    """Range of the uniform base draws before the eigenvalue shift."""

    price_range: tuple[float, float] = (10.0, 100.0)
    holding_range: tuple[float, float] = (500.0, 1000.0)
    l0_over_e0: float = 25.0
    rho1: float = 18.0
    seed: int = 0

    def validate(self) -> None:
        """Validate the parameters.

        Raises:
            ConfigurationError: If a count or range is invalid
        """
        if self.m < 1:
            raise ConfigurationError(f"m must be positive, got {self.m}")
        for name, count in (("s", self.s), ("q", self.q)):
            if not 0 <= count < self.m:
                raise ConfigurationError(f"{name} must be in [0, {self.m - 1}], got {count}")
        for name, (lo, hi) in (
            ("entry_range", self.entry_range),
            ("price_range", self.price_range),
            ("holding_range", self.holding_range),
        ):
            if not 0 < lo <= hi:
                raise ConfigurationError(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
        if self.rho1 <= 0:
            raise ConfigurationError(f"rho1 must be positive, got {self.rho1}")
        if self.l0_over_e0 <= self.rho1:
            raise ConfigurationError(
                f"l0_over_e0 = {self.l0_over_e0} must exceed rho1 = {self.rho1} "
                "for the portfolio to start over-levered"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def _rng(seed: int, index: int, attempt: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index, attempt])))


def gap_shift(eigenvalues: NDArray[np.float64], count: int) -> float:
    """Shift leaving exactly ``count`` eigenvalues below it.

    The midpoint of the gap after the ``count`` smallest eigenvalues; for
    ``count = 0``, half the lowest gap below the smallest eigenvalue.
    """
    vals = np.sort(eigenvalues)
    if count > 0:
        return 0.5 * float(vals[count - 1] + vals[count])
    gap = float(vals[1] - vals[0]) if vals.shape[0] > 1 else abs(float(vals[0]))
    return float(vals[0]) - 0.5 * gap


def generate(spec: GenSpec, *, index: int = 0) -> MarketModel:
    """Draw a valid instance whose quadratics have the requested inertia.

    Draws C and F uniformly, shifts their symmetric parts by gap midpoints
    v and w, and sets Λ = ½(C − vI + F − wI), Γ = C − vI − F + wI so that
    Λ̂ + ½Γ̂ = C̃ − vI and Λ̂ − ½Γ̂ = F̃ − wI. Prices and holdings are drawn
    uniformly and the liability is set to give the requested l0/e0.
    Attempts that fail validation or the inertia check are redrawn from
    the next sub-seed.

    Args:
        spec: Instance parameters
        index: Instance number within the seed's stream

    Returns:
        A model passing validation with (s, q) as requested

    Raises:
        ConfigurationError: If the spec is invalid
        GenerationError: If no attempt succeeds
    """
    spec.validate()
    m = spec.m
    eye = np.eye(m)
    reform_config = ReformConfig()

    for attempt in range(MAX_ATTEMPTS):
        rng = _rng(spec.seed, index, attempt)
        c = rng.uniform(*spec.entry_range, size=(m, m))
        f = rng.uniform(*spec.entry_range, size=(m, m))
        v = gap_shift(np.linalg.eigvalsh(0.5 * (c + c.T)), spec.q)
        w = gap_shift(np.linalg.eigvalsh(0.5 * (f + f.T)), spec.s)

        lam = 0.5 * (c - v * eye + f - w * eye)
        gam = c - v * eye - f + w * eye
        p0 = rng.uniform(*spec.price_range, size=m)
        x0 = rng.uniform(*spec.holding_range, size=m)
        value = float(p0 @ x0)
        e0 = value / (1.0 + spec.l0_over_e0)

        model = MarketModel(
            temp_impact=lam,
            perm_impact=gam,
            p0=p0,
            x0=x0,
            l0=value - e0,
            rho1=spec.rho1,
        )
        outcome = validate(model)
        if not outcome.ok:
            logger.debug("Attempt %d failed checks %s", attempt, outcome.failed)
            continue
        split = spectral_split(model, reform_config)
        if (split.s, split.q) != (spec.s, spec.q):
            logger.debug("Attempt %d has inertia (%d, %d)", attempt, split.s, split.q)
            continue
        return model

    raise GenerationError(
        f"no valid instance for m={m}, s={spec.s}, q={spec.q} in {MAX_ATTEMPTS} attempts",
        attempts=MAX_ATTEMPTS,
    )


def generate_many(spec: GenSpec, count: int) -> list[MarketModel]:
    """Instances 0..count−1 of the spec's seed stream."""
    return [generate(spec, index=k) for k in range(count)]
