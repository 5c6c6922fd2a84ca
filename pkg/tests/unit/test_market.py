"""Unit tests for the market model, financial quantities and checks."""

import numpy as np
import pytest

from deleverage.errors import InvalidModelError, ValidationError
from deleverage.finance import (
    check_priority_conditions,
    diagnose,
    equity,
    leverage_gap,
    leverage_must_bind,
    leverage_ratio,
    liability,
    objective,
    post_trade_prices,
    relative_gap,
    validate,
)
from deleverage.models import MarketModel, Strategy, trade_vector


def _pair_model(lam: list[list[float]], gam: list[list[float]]) -> MarketModel:
    return MarketModel(
        temp_impact=np.array(lam),
        perm_impact=np.array(gam),
        p0=np.array([10.0, 10.0]),
        x0=np.array([1.0, 1.0]),
        l0=19.0,
        rho1=5.0,
    )


class TestMarketModel:
    """Tests for MarketModel construction."""

    def test_derived_quantities(self, example1: MarketModel) -> None:
        """Test m, e0 and the symmetric parts."""
        assert example1.m == 3
        assert example1.e0 == pytest.approx(0.8462, abs=1e-4)
        assert example1.l0 == pytest.approx(21.1538, abs=1e-4)
        assert example1.initial_leverage == pytest.approx(25.0)
        np.testing.assert_allclose(example1.lam_hat, example1.lam_hat.T)

    def test_arrays_are_read_only(self, example1: MarketModel) -> None:
        """Test that stored arrays cannot be mutated."""
        with pytest.raises(ValueError):
            example1.p0[0] = 1.0

    def test_dimension_mismatch(self) -> None:
        """Test holdings of the wrong length."""
        with pytest.raises(ValidationError) as exc:
            MarketModel(
                temp_impact=np.eye(2),
                perm_impact=np.eye(2),
                p0=np.ones(2),
                x0=np.ones(3),
                l0=1.0,
                rho1=1.0,
            )
        assert exc.value.field == "x0"

    def test_non_square_matrix(self) -> None:
        """Test a non-square impact matrix."""
        with pytest.raises(ValidationError) as exc:
            MarketModel(
                temp_impact=np.ones((2, 3)),
                perm_impact=np.eye(2),
                p0=np.ones(2),
                x0=np.ones(2),
                l0=1.0,
                rho1=1.0,
            )
        assert exc.value.field == "temp_impact"

    def test_non_finite_scalar(self) -> None:
        """Test an infinite liability."""
        with pytest.raises(ValidationError) as exc:
            MarketModel(
                temp_impact=np.eye(1),
                perm_impact=np.eye(1),
                p0=np.ones(1),
                x0=np.ones(1),
                l0=float("inf"),
                rho1=1.0,
            )
        assert exc.value.field == "l0"

    def test_with_rho1(self, example1: MarketModel) -> None:
        """Test copying with a new bound."""
        other = example1.with_rho1(10)
        assert other.rho1 == 10.0
        assert example1.rho1 == 18.0
        np.testing.assert_array_equal(other.perm_impact, example1.perm_impact)

    def test_from_dict_scale(self) -> None:
        """Test that the scale multiplies both matrices."""
        model = MarketModel.from_dict(
            {
                "lambda": [[2.0]],
                "gamma": [[4.0]],
                "p0": [1.0],
                "x0": [1.0],
                "l0": 0.5,
                "rho1": 0.1,
                "scale": 1e-4,
            }
        )
        assert model.temp_impact[0, 0] == pytest.approx(2e-4)
        assert model.perm_impact[0, 0] == pytest.approx(4e-4)

    def test_from_dict_missing_field(self) -> None:
        """Test a missing field is named."""
        with pytest.raises(ValidationError) as exc:
            MarketModel.from_dict({"lambda": [[1.0]], "gamma": [[1.0]], "p0": [1.0], "x0": [1.0]})
        assert exc.value.field == "l0"

    def test_from_dict_m_mismatch(self) -> None:
        """Test a declared m that disagrees with the data."""
        with pytest.raises(ValidationError) as exc:
            MarketModel.from_dict(
                {
                    "m": 2,
                    "lambda": [[1.0]],
                    "gamma": [[1.0]],
                    "p0": [1.0],
                    "x0": [1.0],
                    "l0": 0.5,
                    "rho1": 0.1,
                }
            )
        assert exc.value.field == "m"


class TestStrategy:
    """Tests for Strategy."""

    def test_box(self) -> None:
        """Test the trade box check and projection."""
        x0 = np.array([1.0, 2.0])
        y = Strategy(np.array([-1.5, 0.1]))
        assert not y.in_box(x0)
        clipped = y.clipped(x0)
        np.testing.assert_array_equal(clipped.y, [-1.0, 0.0])
        assert clipped.in_box(x0)

    def test_trade_vector(self) -> None:
        """Test extraction from a Strategy and from a list."""
        np.testing.assert_array_equal(trade_vector(Strategy(np.zeros(2)), 2), [0.0, 0.0])
        np.testing.assert_array_equal(trade_vector([1, 2], 2), [1.0, 2.0])
        with pytest.raises(ValidationError):
            trade_vector(Strategy(np.zeros(3)), 2)


class TestQuantities:
    """Tests for the closed-form quantities."""

    def test_no_trade(self, example1: MarketModel) -> None:
        """Test values at y = 0."""
        zero = np.zeros(3)
        assert equity(example1, zero) == pytest.approx(example1.e0)
        assert liability(example1, zero) == pytest.approx(example1.l0)
        assert objective(example1, zero) == 0.0
        assert leverage_gap(example1, zero) == pytest.approx(
            example1.l0 - example1.rho1 * example1.e0
        )

    def test_equity_is_marked_to_market(
        self, example2: MarketModel, rng: np.random.Generator
    ) -> None:
        """Test e1 = p1ᵀ(x0 + y) − l1 for random trades."""
        for _ in range(20):
            y = -rng.uniform(0.0, 1.0, size=3) * example2.x0
            marked = post_trade_prices(example2, y) @ (example2.x0 + y) - liability(example2, y)
            assert equity(example2, y) == pytest.approx(marked, rel=1e-12, abs=1e-12)

    def test_objective_is_equity_loss(
        self, example3: MarketModel, rng: np.random.Generator
    ) -> None:
        """Test e1 = e0 − f."""
        y = -rng.uniform(0.0, 1.0, size=6) * example3.x0
        assert equity(example3, y) == pytest.approx(example3.e0 - objective(example3, y), rel=1e-12)

    def test_gap_is_liability_minus_scaled_equity(self, example2: MarketModel) -> None:
        """Test g = l1 − ρ1·e1."""
        y = np.array([-0.5, -0.2, -0.1])
        expected = liability(example2, y) - example2.rho1 * equity(example2, y)
        assert leverage_gap(example2, y) == pytest.approx(expected, rel=1e-12)

    def test_only_symmetric_parts_matter(
        self, example2: MarketModel, rng: np.random.Generator
    ) -> None:
        """Test that symmetrizing the matrices leaves every quantity unchanged."""
        sym = MarketModel(
            temp_impact=example2.lam_hat,
            perm_impact=example2.perm_impact,
            p0=example2.p0,
            x0=example2.x0,
            l0=example2.l0,
            rho1=example2.rho1,
        )
        for _ in range(100):
            y = rng.normal(size=3)
            assert liability(sym, y) == pytest.approx(liability(example2, y), rel=1e-12)
            assert equity(sym, y) == pytest.approx(equity(example2, y), rel=1e-12)

    def test_leverage_ratio(self, example1: MarketModel) -> None:
        """Test the initial ratio."""
        assert leverage_ratio(example1, np.zeros(3)) == pytest.approx(25.0)

    def test_full_liquidation_leaves_negative_liability(self, example1: MarketModel) -> None:
        """Test l1(−x0) < 0 on the first example."""
        assert liability(example1, -example1.x0) < 0


class TestValidate:
    """Tests for validate."""

    @pytest.mark.parametrize("name", ["example1", "example2", "example3", "example4"])
    def test_examples_pass(self, name: str, request: pytest.FixtureRequest) -> None:
        """Test that every worked example is valid."""
        model = request.getfixturevalue(name)
        outcome = validate(model)
        assert outcome.ok, outcome.failed
        outcome.raise_if_invalid()

    def test_initial_values(self, example1: MarketModel) -> None:
        """Test the reported liability and equity."""
        outcome = validate(example1)
        assert outcome.l0 == pytest.approx(21.1538, abs=1e-3)
        assert outcome.e0 == pytest.approx(0.8462, abs=1e-3)

    def test_not_over_levered(self, example1: MarketModel) -> None:
        """Test a bound the portfolio already meets."""
        outcome = validate(example1.with_rho1(30.0))
        assert not outcome.ok
        assert outcome.failed == ("over_levered",)
        with pytest.raises(InvalidModelError) as exc:
            outcome.raise_if_invalid()
        assert exc.value.failed_checks == ("over_levered",)

    def test_negative_equity(self, example1: MarketModel) -> None:
        """Test a liability exceeding the portfolio value."""
        outcome = validate(
            MarketModel(
                temp_impact=example1.temp_impact,
                perm_impact=example1.perm_impact,
                p0=example1.p0,
                x0=example1.x0,
                l0=30.0,
                rho1=18.0,
            )
        )
        assert "positive_equity" in outcome.failed
        assert "full_liquidation" in outcome.failed

    def test_check_lookup(self, example1: MarketModel) -> None:
        """Test access to a single check."""
        outcome = validate(example1)
        assert outcome.get("full_liquidation").passed
        with pytest.raises(KeyError):
            outcome.get("no_such_check")

    def test_to_dict(self, example1: MarketModel) -> None:
        """Test serialization."""
        data = validate(example1).to_dict()
        assert data["ok"] is True
        assert {c["name"] for c in data["checks"]} >= {"positive_equity", "over_levered"}


class TestPriorityConditions:
    """Tests for check_priority_conditions."""

    def test_second_example_pair_holds(self, example2: MarketModel) -> None:
        """Test that assets 1 and 2 of the second example meet all conditions."""
        flags = check_priority_conditions(example2, 0, 1)
        assert flags.applicable
        assert flags.conditions == (True, True, True, True)
        assert flags.all_hold

    def test_first_example_pair_holds(self, example1: MarketModel) -> None:
        """Test assets 1 and 2 of the first example."""
        assert check_priority_conditions(example1, 0, 1).all_hold

    def test_rounded_price_example_fails(self, example4: MarketModel) -> None:
        """Test that the estimated matrices violate at least one condition."""
        flags = check_priority_conditions(example4, 0, 1)
        assert flags.applicable
        assert not flags.all_hold

    def test_not_applicable_for_different_prices(self, example3: MarketModel) -> None:
        """Test a pair with different initial prices."""
        flags = check_priority_conditions(example3, 0, 1)
        assert not flags.applicable
        assert not flags.all_hold

    def test_strict_and_weak(self) -> None:
        """Test a tie on the strict inequality."""
        model = _pair_model([[0.001, 0.002], [0.002, 0.002]], [[0.001, 0.0015], [0.0015, 0.002]])
        assert not check_priority_conditions(model, 0, 1, strict=True).all_hold
        assert check_priority_conditions(model, 0, 1, strict=False).all_hold

    def test_index_out_of_range(self, example1: MarketModel) -> None:
        """Test an invalid asset index."""
        with pytest.raises(ValidationError) as exc:
            check_priority_conditions(example1, 0, 3)
        assert exc.value.field == "j"


class TestDiagnostics:
    """Tests for must-bind detection, diagnose and relative_gap."""

    def test_must_bind(
        self, example1: MarketModel, example2: MarketModel, example3: MarketModel
    ) -> None:
        """Test the non-negative symmetric impact condition."""
        assert leverage_must_bind(example1)
        assert not leverage_must_bind(example2)
        assert not leverage_must_bind(example3)

    def test_diagnose_at_no_trade(self, example1: MarketModel) -> None:
        """Test diagnostics of the no-trade strategy."""
        report = diagnose(example1, np.zeros(3), rho_max=20.0)
        assert not report.leverage_active
        assert report.slack > 0
        assert report.must_bind
        assert report.rho_max == 20.0
        assert any(p.i == 0 and p.j == 1 and p.all_hold for p in report.priority_pairs)
        # y = 0 sells neither asset, so the priority order is respected weakly
        assert all(report.priority_respected)
        assert report.to_dict()["must_bind"] is True

    def test_diagnose_detects_violated_priority(self, example2: MarketModel) -> None:
        """Test a strategy selling the comparison asset first."""
        report = diagnose(example2, np.array([-0.1, -0.9, 0.0]))
        assert False in report.priority_respected

    def test_relative_gap(self) -> None:
        """Test the relative gap formula."""
        assert relative_gap(10.0, 9.0) == pytest.approx(0.1)
        assert relative_gap(0.5, 0.4) == pytest.approx(0.1)
