"""Shared test fixtures for deleverage."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from deleverage import MarketModel, SolverConfig, create_config
from deleverage.models.schema import load_instance

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "instances"


def load_example(name: str) -> MarketModel:
    """Load one of the worked example instances."""
    path = DATA_DIR / f"{name}.json"
    return load_instance(path.read_text(), source=str(path))


@pytest.fixture
def data_dir() -> Path:
    """Directory of the worked example instances."""
    return DATA_DIR


@pytest.fixture
def example1() -> MarketModel:
    """Three assets, non-negative impact, symmetric permanent impact, rho1 = 18."""
    return load_example("example1")


@pytest.fixture
def example2() -> MarketModel:
    """Three assets, asymmetric impact with negative entries, rho1 = 12."""
    return load_example("example2")


@pytest.fixture
def example3() -> MarketModel:
    """Six stocks with estimated impact matrices, rho1 = 18."""
    return load_example("example3")


@pytest.fixture
def example4() -> MarketModel:
    """Example 3 with rounded prices."""
    return load_example("example4")


@pytest.fixture
def convex_model() -> MarketModel:
    """Two assets with diagonal PSD impact; nothing to branch on."""
    return MarketModel(
        temp_impact=np.diag([0.02, 0.03]),
        perm_impact=np.diag([0.01, 0.01]),
        p0=np.array([10.0, 10.0]),
        x0=np.array([1.0, 1.0]),
        l0=19.0,
        rho1=5.0,
    )


@pytest.fixture
def config() -> SolverConfig:
    """Default solver configuration."""
    return SolverConfig()


@pytest.fixture
def fast_config() -> SolverConfig:
    """Configuration with a short time limit for tests."""
    return create_config(eps=1e-5, time_limit=60.0)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(20240601)
