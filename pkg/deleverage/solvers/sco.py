"""Successive convex optimization.

Each iteration replaces the concave terms of the transformed problem by
their tangents at the current point and solves the resulting convex
majorant. Iterates stay feasible and the objective never increases; the
run stops once the linearization point moves by at most eps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import nnls

from deleverage.core.config import DEFAULT_EPS, SolverConfig
from deleverage.errors import InfeasibleStartError, SubproblemError
from deleverage.models.types import ScoStatus, SubStatus
from deleverage.reform.congruence import DcReform
from deleverage.solvers.barrier import BarrierSolver, SubSolution, SubSolver
from deleverage.solvers.subproblem import build_linearized
from deleverage.utils.validation import validate_positive, validate_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, eq=False)
class ScoResult:
    """Outcome of a successive convex optimization run."""

    z: NDArray[np.float64]
    xi: NDArray[np.float64]
    iterations: int
    f_hat_trace: tuple[float, ...]
    """f̂ at the start point and after every accepted iterate; non-increasing."""

    status: ScoStatus
    last_solution: SubSolution | None = None

    @property
    def value(self) -> float:
        """f̂ at the returned point."""
        return self.f_hat_trace[-1]

    @property
    def converged(self) -> bool:
        """Whether the step test was met."""
        return self.status is ScoStatus.CONVERGED


def _start_violation(reform: DcReform, z: NDArray[np.float64], leverage: bool) -> float:
    box = reform.box_violation(z)
    return max(box, reform.g_hat(z)) if leverage else box


def sco(
    reform: DcReform,
    z0: ArrayLike | None = None,
    eps: float = DEFAULT_EPS,
    max_iter: int | None = None,
    *,
    leverage: bool = True,
    solver: SubSolver | None = None,
    config: SolverConfig | None = None,
    start_tol: float | None = None,
) -> ScoResult:
    """Run successive convex optimization from a feasible point.

    Args:
        reform: Transformed problem
        z0: Feasible start (defaults to the image of full liquidation)
        eps: Step tolerance on the linearization point
        max_iter: Iteration cap (defaults to the configured one)
        leverage: Keep the leverage constraint
        solver: Subproblem solver (barrier method if None)
        config: Solver configuration (uses defaults if None)
        start_tol: Feasibility tolerance for z0 (eps/10 if None)

    Returns:
        Final point, iteration count and objective trace

    Raises:
        InfeasibleStartError: If z0 violates a constraint by more than start_tol
        SubproblemError: If a subproblem is infeasible or ends without a
            feasible point
    """
    if config is None:
        config = SolverConfig()
    eps = validate_positive(eps, field="eps")
    if max_iter is None:
        max_iter = config.sco.max_iter
    if solver is None:
        solver = BarrierSolver(config.barrier)

    z = reform.start_point() if z0 is None else validate_vector(z0, reform.m, field="z0")
    feas_tol = eps / 10.0
    violation = _start_violation(reform, z, leverage)
    if violation > (feas_tol if start_tol is None else start_tol):
        raise InfeasibleStartError(
            f"start point violates the constraints by {violation:.3e}", violation=violation
        )

    k = reform.r if leverage else reform.s
    tol = eps * config.sco.subproblem_tol_factor
    trace = [reform.f_hat(z)]
    last: SubSolution | None = None

    for iteration in range(1, max_iter + 1):
        xi = np.clip(z[:k], reform.z_lo[:k], reform.z_hi[:k])
        problem = build_linearized(reform, xi, leverage=leverage, start=z)
        solution = solver.solve(problem, tol)

        if solution.status is SubStatus.INFEASIBLE or solution.max_violation > feas_tol:
            raise SubproblemError(
                f"linearized problem at iteration {iteration} ended {solution.status.value} "
                f"with violation {solution.max_violation:.3e}",
                status=solution.status.value,
                iteration=iteration,
                retryable=True,
            )
        if solution.status is SubStatus.MAX_ITERS:
            logger.warning(
                "Linearized problem at iteration %d hit the Newton step limit", iteration
            )

        value = reform.f_hat(solution.x)
        if value > trace[-1]:
            logger.debug(
                "Iteration %d would raise f_hat by %.3e, keeping the current point",
                iteration,
                value - trace[-1],
            )
            return ScoResult(z, xi, iteration - 1, tuple(trace), ScoStatus.CONVERGED, last)

        step = float(np.linalg.norm(solution.x[:k] - xi))
        z = solution.x
        last = solution
        trace.append(value)
        logger.debug("SCO iteration %d: f_hat=%.10g step=%.3e", iteration, value, step)

        if step <= eps:
            logger.info("SCO converged in %d iterations, f_hat=%.10g", iteration, value)
            return ScoResult(z, z[:k].copy(), iteration, tuple(trace), ScoStatus.CONVERGED, last)

    logger.warning("SCO stopped at the iteration limit %d", max_iter)
    return ScoResult(z, z[:k].copy(), max_iter, tuple(trace), ScoStatus.ITER_LIMIT, last)


def kkt_residual(
    reform: DcReform,
    z: ArrayLike,
    *,
    leverage: bool = True,
    active_tol: float = 1e-6,
) -> float:
    """Stationarity residual of the transformed problem at z.

    Multipliers are the non-negative least-squares fit of −∇f̂ on the
    gradients of the active constraints; the residual is the sup-norm of
    the fitted Lagrangian gradient relative to max(1, ‖∇f̂‖∞).
    """
    v = validate_vector(z, reform.m, field="z")
    grad = reform.f_hat_grad(v)
    columns: list[NDArray[np.float64]] = []

    if leverage and reform.g_hat(v) >= -active_tol * max(1.0, abs(reform.const_g)):
        columns.append(reform.g_hat_grad(v))
    y = reform.d @ v
    x0 = reform.model.x0
    band = active_tol * np.maximum(1.0, x0)
    for i in range(reform.m):
        if y[i] >= -band[i]:
            columns.append(reform.d[i])
        if y[i] <= -x0[i] + band[i]:
            columns.append(-reform.d[i])

    if columns:
        active = np.column_stack(columns)
        mult, _ = nnls(active, -grad)
        lagr = grad + active @ mult
    else:
        lagr = grad
    return float(np.max(np.abs(lagr))) / max(1.0, float(np.max(np.abs(grad))))
