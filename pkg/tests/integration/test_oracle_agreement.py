"""Integration tests comparing the solvers with brute-force grid search."""

import pytest

from deleverage import SolverConfig
from deleverage.generation import GenSpec, generate
from deleverage.models import MarketModel
from deleverage.solvers import GridSpec, grid_resolution, grid_search, scobb


class TestOracleAgreement:
    """Tests for grid search against the certified optimum."""

    @pytest.mark.parametrize(
        ("name", "expected"), [("example1", 0.8287), ("example2", 0.6855)]
    )
    def test_examples(
        self, name: str, expected: float, request: pytest.FixtureRequest
    ) -> None:
        """Test that the 101-point grid lands within 0.005 of the optimum."""
        model: MarketModel = request.getfixturevalue(name)
        _, equity = grid_search(model, GridSpec(points_per_dim=101))
        assert equity == pytest.approx(expected, abs=0.005)

    def test_grid_never_beats_certificate(
        self, example2: MarketModel, fast_config: SolverConfig
    ) -> None:
        """Test that no feasible grid point exceeds the certified equity."""
        report = scobb(example2, config=fast_config)
        _, equity = grid_search(example2, GridSpec(points_per_dim=51))
        assert equity <= report.equity + fast_config.bnb.eps

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(20))
    def test_random_instances(self, seed: int, fast_config: SolverConfig) -> None:
        """Test two-sided agreement on generated three-asset instances."""
        model = generate(GenSpec(m=3, s=1, q=1, seed=seed))
        report = scobb(model, config=fast_config)
        grid = GridSpec(points_per_dim=201)
        _, equity = grid_search(model, grid)
        eps = fast_config.bnb.eps
        assert equity <= report.equity + eps
        assert report.equity <= equity + grid_resolution(model, grid) + eps
