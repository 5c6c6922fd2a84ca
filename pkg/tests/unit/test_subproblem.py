"""Unit tests for convex subproblems and their builders."""

import numpy as np
import pytest

from deleverage.errors import ValidationError
from deleverage.models import MarketModel
from deleverage.reform import reformulate
from deleverage.solvers import ConvexSubproblem, QuadForm, build_linearized, build_relaxation


class TestQuadForm:
    """Tests for QuadForm."""

    def test_value_and_gradient(self) -> None:
        """Test evaluation of xᵀPx + cᵀx + d."""
        q = QuadForm(np.array([[2.0, 0.0], [0.0, 1.0]]), np.array([1.0, -1.0]), 3.0)
        x = np.array([1.0, 2.0])
        assert q.value(x) == pytest.approx(2.0 + 4.0 + 1.0 - 2.0 + 3.0)
        np.testing.assert_allclose(q.gradient(x), [5.0, 3.0])

    def test_symmetrizes(self) -> None:
        """Test that the stored matrix is the symmetric part."""
        q = QuadForm(np.array([[1.0, 2.0], [0.0, 1.0]]), np.zeros(2))
        np.testing.assert_array_equal(q.p, [[1.0, 1.0], [1.0, 1.0]])

    def test_shape_mismatch(self) -> None:
        """Test a quadratic term of the wrong size."""
        with pytest.raises(ValidationError) as exc:
            QuadForm(np.eye(3), np.zeros(2))
        assert exc.value.field == "p"

    def test_restrict(self) -> None:
        """Test that restriction agrees with the full form."""
        q = QuadForm(np.array([[2.0, 1.0], [1.0, 3.0]]), np.array([1.0, 2.0]), 0.5)
        base = np.array([0.0, 4.0])
        sub = q.restrict(np.array([0]), base)
        for w in (-1.0, 0.0, 2.5):
            assert sub.value(np.array([w])) == pytest.approx(q.value(np.array([w, 4.0])))


class TestConvexSubproblem:
    """Tests for ConvexSubproblem."""

    def test_rejects_non_psd_objective(self) -> None:
        """Test the PSD check on the objective."""
        with pytest.raises(ValidationError) as exc:
            ConvexSubproblem(QuadForm(np.diag([1.0, -1.0]), np.zeros(2)))
        assert exc.value.field == "objective"

    def test_rejects_non_psd_constraint(self) -> None:
        """Test the PSD check on a constraint."""
        with pytest.raises(ValidationError):
            ConvexSubproblem(
                QuadForm(np.eye(2), np.zeros(2)),
                quad_constraints=(QuadForm(np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2)),),
            )

    def test_row_shape_mismatch(self) -> None:
        """Test linear rows with the wrong width."""
        with pytest.raises(ValidationError) as exc:
            ConvexSubproblem(QuadForm(np.eye(2), np.zeros(2)), lin_a=np.ones((1, 3)), lin_b=[1.0])
        assert exc.value.field == "lin_a"

    def test_fixed_index_range(self) -> None:
        """Test a fixed index outside the variables."""
        with pytest.raises(ValidationError):
            ConvexSubproblem(QuadForm(np.eye(2), np.zeros(2)), fixed=((2, 0.0),))

    def test_max_violation_uses_row_norms(self) -> None:
        """Test that linear rows are measured per unit norm."""
        problem = ConvexSubproblem(
            QuadForm(np.eye(1), np.zeros(1)),
            lin_a=np.array([[2.0]]),
            lin_b=np.array([2.0]),
        )
        assert problem.max_violation(np.array([2.0])) == pytest.approx(1.0)
        # satisfied rows report zero
        assert problem.max_violation(np.array([0.0])) == 0.0
        assert problem.constraint_count == 1

    def test_reduced(self) -> None:
        """Test elimination of fixed coordinates."""
        problem = ConvexSubproblem(
            QuadForm(np.eye(2), np.zeros(2)),
            quad_constraints=(QuadForm(np.diag([1.0, 0.0]), np.zeros(2), -1.0),),
            lin_a=np.array([[-1.0, -1.0], [-1.0, 0.0]]),
            lin_b=np.array([-1.0, 0.0]),
            fixed=((0, 0.25),),
        )
        reduced = problem.reduced()
        assert reduced.problem is not None
        assert reduced.problem.n == 1
        # the quadratic and the second row only involve the fixed coordinate
        assert reduced.quad_index.size == 0
        np.testing.assert_array_equal(reduced.lin_index, [0])
        assert reduced.constant_violation <= 0.0
        np.testing.assert_allclose(reduced.embed(np.array([0.75])), [0.25, 0.75])


class TestBuildLinearized:
    """Tests for build_linearized."""

    def test_majorizes(self, example3: MarketModel, rng: np.random.Generator) -> None:
        """Test that the built problem overestimates f̂ and ĝ, touching at ξ."""
        reform = reformulate(example3)
        z0 = reform.start_point()
        problem = build_linearized(reform, z0[: reform.r])
        scale = max(1.0, example3.e0)

        assert problem.objective.value(z0) == pytest.approx(reform.f_hat(z0), abs=1e-8 * scale)
        gap = problem.quad_constraints[0]
        assert gap.value(z0) == pytest.approx(reform.g_hat(z0), abs=1e-8 * example3.l0)

        for _ in range(20):
            z = reform.to_z(-rng.uniform(0.0, 1.0, size=6) * example3.x0)
            assert problem.objective.value(z) >= reform.f_hat(z) - 1e-8 * scale
            assert gap.value(z) >= reform.g_hat(z) - 1e-8 * example3.l0

    def test_start_is_feasible(self, example1: MarketModel) -> None:
        """Test that full liquidation is feasible for the built problem."""
        reform = reformulate(example1)
        z0 = reform.start_point()
        problem = build_linearized(reform, z0[: reform.r], start=z0)
        assert problem.max_violation(z0) <= 1e-9

    def test_without_leverage(self, example3: MarketModel) -> None:
        """Test the leverage-free variant linearizes s coordinates."""
        reform = reformulate(example3)
        problem = build_linearized(reform, reform.start_point()[: reform.s], leverage=False)
        assert problem.quad_constraints == ()
        assert problem.b.shape == (12,)

    def test_xi_outside_bounds(self, example3: MarketModel) -> None:
        """Test a linearization point beyond the z-bounds."""
        reform = reformulate(example3)
        xi = reform.z_hi[: reform.r] + 10.0 * (reform.z_hi[: reform.r] - reform.z_lo[: reform.r])
        with pytest.raises(ValidationError) as exc:
            build_linearized(reform, xi)
        assert exc.value.field == "xi"

    def test_xi_wrong_length(self, example3: MarketModel) -> None:
        """Test a linearization point of the wrong length."""
        reform = reformulate(example3)
        with pytest.raises(ValidationError):
            build_linearized(reform, np.zeros(reform.r + 1))


class TestBuildRelaxation:
    """Tests for build_relaxation."""

    def test_exact_on_envelope(self, example3: MarketModel, rng: np.random.Generator) -> None:
        """Test that t = z² reproduces f̂ and ĝ."""
        reform = reformulate(example3)
        k = reform.r
        problem = build_relaxation(reform, reform.z_lo[:k], reform.z_hi[:k])
        assert problem.n == 6 + k
        leverage = problem.quad_constraints[0]
        for _ in range(10):
            z = reform.to_z(-rng.uniform(0.0, 1.0, size=6) * example3.x0)
            x = np.concatenate([z, z[:k] ** 2])
            assert problem.objective.value(x) == pytest.approx(
                reform.f_hat(z), abs=1e-8 * example3.e0
            )
            assert leverage.value(x) == pytest.approx(reform.g_hat(z), abs=1e-8 * example3.l0)
            # envelope rows hold with equality on the parabola
            for i in range(k):
                envelope = problem.quad_constraints[1 + i].value(x)
                assert envelope == pytest.approx(0.0, abs=1e-9 * max(1.0, z[i] ** 2))

    def test_start_strictly_inside_envelope(self, example3: MarketModel) -> None:
        """Test that the default start lies between the parabola and the secants."""
        reform = reformulate(example3)
        k = reform.r
        lo, hi = reform.z_lo[:k], reform.z_hi[:k]
        problem = build_relaxation(reform, lo, hi)
        assert problem.start is not None
        z, t = problem.start[:k], problem.start[6:]
        assert np.all(t > z**2)
        assert np.all(t < (lo + hi) * z - lo * hi)

    def test_degenerate_coordinate_fixed(self, example3: MarketModel) -> None:
        """Test that a zero-width coordinate is pinned at (l, l²)."""
        reform = reformulate(example3)
        k = reform.r
        lo, hi = reform.z_lo[:k].copy(), reform.z_hi[:k].copy()
        point = 0.5 * (lo[0] + hi[0])
        lo[0] = hi[0] = point
        problem = build_relaxation(reform, lo, hi)
        assert (0, point) in problem.fixed
        assert (6, point**2) in problem.fixed

    def test_box_outside_bounds(self, example3: MarketModel) -> None:
        """Test a box leaving the z-bounds."""
        reform = reformulate(example3)
        k = reform.r
        width = reform.z_hi[:k] - reform.z_lo[:k]
        with pytest.raises(ValidationError) as exc:
            build_relaxation(reform, reform.z_lo[:k] - width, reform.z_hi[:k])
        assert exc.value.field == "box"

    def test_empty_box(self, example3: MarketModel) -> None:
        """Test a box with lower above upper."""
        reform = reformulate(example3)
        k = reform.r
        with pytest.raises(ValidationError):
            build_relaxation(reform, reform.z_hi[:k], reform.z_lo[:k])
