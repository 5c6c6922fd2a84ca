"""Unit tests for the random instance generator."""

from types import SimpleNamespace

import numpy as np
import pytest

from deleverage.errors import ConfigurationError, GenerationError
from deleverage.finance import validate
from deleverage.generation import GenSpec, gap_shift, generate, generate_many
from deleverage.reform import spectral_split


class TestGapShift:
    """Tests for gap_shift."""

    @pytest.mark.parametrize(("count", "expected"), [(1, 1.5), (2, 3.0), (0, 0.5)])
    def test_midpoints(self, count: int, expected: float) -> None:
        """Test the shift for each requested count."""
        assert gap_shift(np.array([4.0, 1.0, 2.0]), count) == pytest.approx(expected)

    def test_leaves_count_below(self) -> None:
        """Test that exactly count eigenvalues fall below the shift."""
        vals = np.array([0.3, -0.2, 0.9, 0.1])
        for count in range(4):
            assert int(np.sum(vals < gap_shift(vals, count))) == count


class TestGenerate:
    """Tests for generate."""

    @pytest.mark.parametrize(("m", "s", "q"), [(4, 1, 2), (3, 0, 0), (5, 2, 1)])
    def test_requested_inertia(self, m: int, s: int, q: int) -> None:
        """Test that the drawn model is valid with the requested (s, q)."""
        model = generate(GenSpec(m=m, s=s, q=q, seed=7))
        assert model.m == m
        assert validate(model).ok
        split = spectral_split(model)
        assert (split.s, split.q) == (s, q)

    def test_leverage_target(self) -> None:
        """Test that the liability gives the requested initial ratio."""
        model = generate(GenSpec(m=3, l0_over_e0=30.0, rho1=20.0, seed=1))
        assert model.initial_leverage == pytest.approx(30.0)
        assert model.rho1 == 20.0

    def test_reproducible(self) -> None:
        """Test that a seed and index fix the instance."""
        a = generate(GenSpec(m=4, seed=42), index=2)
        b = generate(GenSpec(m=4, seed=42), index=2)
        np.testing.assert_array_equal(a.temp_impact, b.temp_impact)
        np.testing.assert_array_equal(a.perm_impact, b.perm_impact)
        np.testing.assert_array_equal(a.p0, b.p0)
        assert a.l0 == b.l0

    def test_generate_many_distinct(self) -> None:
        """Test that consecutive indices give different instances."""
        models = generate_many(GenSpec(m=3, seed=5), 3)
        assert len(models) == 3
        assert not np.array_equal(models[0].p0, models[1].p0)
        np.testing.assert_array_equal(models[2].p0, generate(GenSpec(m=3, seed=5), index=2).p0)

    def test_exhausted_attempts(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test the error when no draw has the requested inertia."""
        monkeypatch.setattr(
            "deleverage.generation.generator.spectral_split",
            lambda model, config: SimpleNamespace(s=-1, q=-1),
        )
        with pytest.raises(GenerationError) as exc:
            generate(GenSpec(m=3, seed=0))
        assert exc.value.attempts == 100


class TestGenSpec:
    """Tests for GenSpec validation."""

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"m": 0},
            {"m": 3, "s": 3},
            {"m": 3, "q": -1},
            {"m": 3, "l0_over_e0": 10.0, "rho1": 18.0},
            {"m": 3, "rho1": 0.0},
            {"m": 3, "price_range": (0.0, 1.0)},
            {"m": 3, "entry_range": (2.0, 1.0)},
            {"m": 3, "seed": -1},
        ],
    )
    def test_invalid(self, kwargs: dict[str, object]) -> None:
        """Test each rejected parameter."""
        with pytest.raises(ConfigurationError):
            GenSpec(**kwargs).validate()  # type: ignore[arg-type]
