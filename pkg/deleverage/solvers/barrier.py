"""Log-barrier interior-point solver for convex QCQPs over polyhedra.

A feasibility phase on (x, s) finds a strictly interior point of
``f_i(x) ≤ s``; the main phase then follows the central path of
``t·f0(x) − Σ log(−f_i(x))`` with damped Newton steps, increasing t until
the duality measure m/t drops below the optimality tolerance.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from deleverage.core.config import BarrierConfig
from deleverage.errors import ValidationError
from deleverage.models.types import SubStatus
from deleverage.solvers.subproblem import ConvexSubproblem, QuadForm, ReducedProblem

logger = logging.getLogger(__name__)

_MIN_STEP = 1e-14

# Solver tolerances as a fraction of the requested tolerance.
_TOL_FRACTION = 0.1


@dataclass(frozen=True, slots=True, eq=False)
class SubSolution:
    """Result of a subproblem solve.

    ``kkt_residual`` is the duality measure m/t at the returned point, an
    upper bound on the suboptimality of ``value`` when the status is optimal.
    """

    x: NDArray[np.float64]
    value: float
    status: SubStatus
    kkt_residual: float
    stationarity: float = 0.0
    max_violation: float = 0.0
    duals_quad: NDArray[np.float64] | None = None
    duals_lin: NDArray[np.float64] | None = None
    newton_steps: int = 0
    shift: float = 0.0
    """Relaxation applied to every constraint when no strictly interior point exists."""

    @property
    def optimal(self) -> bool:
        """Whether the solve converged."""
        return self.status is SubStatus.OPTIMAL


@runtime_checkable
class SubSolver(Protocol):
    """Protocol for convex subproblem solvers.

    The local and global algorithms call through this protocol, so an
    external conic solver can be plugged in by wrapping it.
    """

    def solve(self, problem: ConvexSubproblem, tol: float) -> SubSolution:
        """Solve a convex subproblem.

        Args:
            problem: Subproblem to solve
            tol: Requested tolerance; feasibility and optimality are met to tol/10

        Returns:
            Solution with a status flag
        """
        ...


class _Program:
    """Constraints f_i(x) < 0 in working form, linear rows scaled to unit norm."""

    __slots__ = ("p0", "c0", "quads", "a", "b")

    def __init__(
        self,
        p0: NDArray[np.float64],
        c0: NDArray[np.float64],
        quads: list[QuadForm],
        a: NDArray[np.float64],
        b: NDArray[np.float64],
    ) -> None:
        norms = np.maximum(np.linalg.norm(a, axis=1), np.finfo(float).tiny)
        self.p0 = p0
        self.c0 = c0
        self.quads = quads
        self.a = a / norms[:, None] if a.size else a
        self.b = b / norms if b.size else b

    @classmethod
    def from_problem(cls, problem: ConvexSubproblem) -> _Program:
        obj = problem.objective
        return cls(obj.p, obj.c, list(problem.quad_constraints), problem.a, problem.b)

    @property
    def constraint_count(self) -> int:
        return len(self.quads) + int(self.b.shape[0])

    def objective(self, x: NDArray[np.float64]) -> float:
        return float(x @ self.p0 @ x + self.c0 @ x)

    def values(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        quad = np.array([q.value(x) for q in self.quads])
        return np.concatenate([quad, self.a @ x - self.b])

    def worst(self, x: NDArray[np.float64]) -> float:
        vals = self.values(x)
        return float(np.max(vals)) if vals.size else -np.inf

    def relaxed(self, shift: float) -> _Program:
        """Every constraint loosened by ``shift``."""
        quads = [QuadForm(q.p, q.c, q.d - shift) for q in self.quads]
        return _Program(self.p0, self.c0, quads, self.a, self.b + shift)

    def feasibility(self, floor: float) -> _Program:
        """Feasibility problem: minimize s subject to f_i(x) ≤ s and s ≥ −floor."""
        n = self.c0.shape[0]
        quads = []
        for q in self.quads:
            p = np.zeros((n + 1, n + 1))
            p[:n, :n] = q.p
            quads.append(QuadForm(p, np.append(q.c, -1.0), q.d))
        rows = np.hstack([self.a, -np.ones((self.a.shape[0], 1))])
        floor_row = np.zeros((1, n + 1))
        floor_row[0, n] = -1.0
        c0 = np.zeros(n + 1)
        c0[n] = 1.0
        return _Program(
            np.zeros((n + 1, n + 1)),
            c0,
            quads,
            np.vstack([rows, floor_row]),
            np.append(self.b, floor),
        )


@dataclass(slots=True)
class _Budget:
    remaining: int
    used: int = 0

    def take(self) -> bool:
        if self.remaining <= 0:
            return False
        self.remaining -= 1
        self.used += 1
        return True


def _solve_newton_system(
    hess: NDArray[np.float64], rhs: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Solve H dx = rhs for SPD H with Jacobi scaling."""
    scale = np.sqrt(np.maximum(np.abs(np.diag(hess)), np.finfo(float).tiny))
    scaled = hess / np.outer(scale, scale)
    target = rhs / scale
    for ridge in (0.0, 1e-10):
        try:
            factor = linalg.cho_factor(
                scaled + ridge * np.eye(scaled.shape[0]), check_finite=False
            )
        except linalg.LinAlgError:
            continue
        return linalg.cho_solve(factor, target, check_finite=False) / scale
    logger.debug("Newton system not positive definite, using least squares")
    return linalg.lstsq(scaled, target, check_finite=False)[0] / scale


class BarrierSolver:
    """Primal log-barrier method with a feasibility phase.

    Example:
        >>> solver = BarrierSolver()
        >>> solution = solver.solve(problem, tol=1e-6)
        >>> solution.status
        <SubStatus.OPTIMAL: 'optimal'>
    """

    def __init__(self, config: BarrierConfig | None = None) -> None:
        self.config = config or BarrierConfig()
        self.config.validate()

    def solve(self, problem: ConvexSubproblem, tol: float) -> SubSolution:
        """Solve a convex subproblem to tolerance.

        Args:
            problem: Subproblem to solve
            tol: Requested tolerance

        Returns:
            Solution; status is infeasible when the feasibility phase proves
            every point violates some constraint by more than tol/20, and
            max-iters when a phase runs out of Newton steps

        Raises:
            ValidationError: If tol is not positive
        """
        if not tol > 0:
            raise ValidationError(f"tol must be positive, got {tol}", field="tol")
        feas_tol = opt_tol = tol * _TOL_FRACTION

        reduced = problem.reduced()
        if reduced.constant_violation > feas_tol:
            logger.debug(
                "Fixed coordinates violate a constraint by %.3e", reduced.constant_violation
            )
            return self._result(problem, reduced, reduced.base, SubStatus.INFEASIBLE)
        if reduced.problem is None:
            return self._result(problem, reduced, reduced.base, SubStatus.OPTIMAL)

        sub = reduced.problem
        prog = _Program.from_problem(sub)
        start = sub.start if sub.start is not None else np.zeros(sub.n)

        budget = _Budget(self.config.max_newton_steps)
        x, shift, outcome = self._find_interior(prog, start, feas_tol, budget)
        steps = budget.used
        if outcome != "feasible":
            status = SubStatus.INFEASIBLE if outcome == "infeasible" else SubStatus.MAX_ITERS
            logger.debug("Feasibility phase ended %s after %d steps", outcome, steps)
            return self._result(problem, reduced, reduced.embed(x), status, newton_steps=steps)

        if shift > 0:
            prog = prog.relaxed(shift)
        budget = _Budget(self.config.max_newton_steps)
        x, t, outcome = self._follow_path(prog, x, opt_tol, budget)
        steps += budget.used

        status = SubStatus.OPTIMAL if outcome == "converged" else SubStatus.MAX_ITERS
        full = reduced.embed(x)
        if status is SubStatus.OPTIMAL and problem.max_violation(full) > feas_tol:
            status = SubStatus.MAX_ITERS
        return self._result(
            problem, reduced, full, status, prog=prog, x_reduced=x, t=t,
            newton_steps=steps, shift=shift,
        )

    # Path following

    def _newton_step(
        self, prog: _Program, x: NDArray[np.float64], t: float
    ) -> tuple[NDArray[np.float64], float]:
        grad = t * (2.0 * (prog.p0 @ x) + prog.c0)
        hess = 2.0 * t * prog.p0
        if prog.b.size:
            inv = 1.0 / (prog.b - prog.a @ x)
            grad = grad + prog.a.T @ inv
            hess = hess + (prog.a.T * inv**2) @ prog.a
        for q in prog.quads:
            v = q.value(x)
            gq = q.gradient(x)
            grad = grad + gq / -v
            hess = hess + np.outer(gq, gq) / v**2 + (2.0 / -v) * q.p
        dx = _solve_newton_system(hess, -grad)
        return dx, float(-(grad @ dx))

    def _line_search(
        self,
        prog: _Program,
        x: NDArray[np.float64],
        dx: NDArray[np.float64],
        t: float,
        slope: float,
    ) -> float:
        """Backtracking on the barrier objective, keeping every constraint strict.

        Each constraint is quadratic along the ray, so its change is
        s·a + s²·b exactly.
        """
        vals = prog.values(x)
        lin = np.concatenate([[q.gradient(x) @ dx for q in prog.quads], prog.a @ dx])
        quad = np.concatenate([[dx @ q.p @ dx for q in prog.quads], np.zeros(prog.b.shape[0])])
        obj_lin = float((2.0 * (prog.p0 @ x) + prog.c0) @ dx)
        obj_quad = float(dx @ prog.p0 @ dx)

        step = 1.0
        while step >= _MIN_STEP:
            change = step * lin + step**2 * quad
            if np.all(vals + change < 0.0):
                dphi = t * (step * obj_lin + step**2 * obj_quad) - float(
                    np.sum(np.log1p(change / vals))
                )
                if dphi <= self.config.armijo * step * slope:
                    return step
            step *= self.config.backtrack
        return 0.0

    def _center(
        self,
        prog: _Program,
        x: NDArray[np.float64],
        t: float,
        budget: _Budget,
        stop: Callable[[NDArray[np.float64]], bool] | None = None,
    ) -> tuple[NDArray[np.float64], str]:
        while True:
            if stop is not None and stop(x):
                return x, "stopped"
            dx, decrement = self._newton_step(prog, x, t)
            scale = max(1.0, abs(t * prog.objective(x)))
            if abs(decrement) / 2.0 <= self.config.newton_tol * scale:
                return x, "centered"
            if not budget.take():
                return x, "exhausted"
            step = self._line_search(prog, x, dx, t, -abs(decrement))
            if step == 0.0:
                # no representable progress left along the Newton direction
                return x, "centered"
            x = x + step * dx

    def _follow_path(
        self,
        prog: _Program,
        x: NDArray[np.float64],
        gap_tol: float,
        budget: _Budget,
        *,
        stop: Callable[[NDArray[np.float64]], bool] | None = None,
        check: Callable[[NDArray[np.float64], float], str | None] | None = None,
    ) -> tuple[NDArray[np.float64], float, str]:
        count = prog.constraint_count
        if count == 0:
            x, outcome = self._center(prog, x, 1.0, budget)
            return x, np.inf, "converged" if outcome == "centered" else outcome

        # barrier weight chosen so the initial duality measure matches the objective scale
        t = self.config.t0 * count / max(1.0, abs(prog.objective(x)))
        while True:
            x, outcome = self._center(prog, x, t, budget, stop)
            if outcome != "centered":
                return x, t, outcome
            logger.debug("Centered at t=%.3e, gap %.3e, %d steps", t, count / t, budget.used)
            if check is not None:
                verdict = check(x, t)
                if verdict is not None:
                    return x, t, verdict
            if count / t <= gap_tol:
                return x, t, "converged"
            t *= self.config.mu

    def _find_interior(
        self,
        prog: _Program,
        x0: NDArray[np.float64],
        feas_tol: float,
        budget: _Budget,
    ) -> tuple[NDArray[np.float64], float, str]:
        """Feasibility phase.

        Returns:
            (point, shift, outcome) where outcome is feasible, infeasible or
            exhausted and shift is the constraint relaxation the main phase
            must apply
        """
        margin = feas_tol / 4.0
        worst = prog.worst(x0)
        if worst < -margin:
            return x0, 0.0, "feasible"

        n = x0.shape[0]
        aux = prog.feasibility(max(1.0, abs(worst)))
        count = aux.constraint_count
        y0 = np.append(x0, worst + 0.1 * max(1.0, abs(worst)))

        def interior(y: NDArray[np.float64]) -> bool:
            return bool(y[n] < -margin)

        def verdict(y: NDArray[np.float64], t: float) -> str | None:
            gap = count / t
            if y[n] - gap > feas_tol / 2.0:
                return "infeasible"
            if gap <= margin / 10.0:
                return "settled"
            return None

        y, _, outcome = self._follow_path(aux, y0, 0.0, budget, stop=interior, check=verdict)
        x = y[:n]
        level = prog.worst(x)
        if level < -margin:
            return x, 0.0, "feasible"
        if outcome == "infeasible":
            return x, 0.0, "infeasible"
        if level <= feas_tol / 2.0:
            return x, max(level, 0.0) + margin, "feasible"
        return x, 0.0, "infeasible" if outcome == "settled" else "exhausted"

    # Reporting

    def _result(
        self,
        problem: ConvexSubproblem,
        reduced: ReducedProblem,
        full: NDArray[np.float64],
        status: SubStatus,
        *,
        prog: _Program | None = None,
        x_reduced: NDArray[np.float64] | None = None,
        t: float = np.inf,
        newton_steps: int = 0,
        shift: float = 0.0,
    ) -> SubSolution:
        duals_quad = np.zeros(len(problem.quad_constraints))
        duals_lin = np.zeros(problem.b.shape[0])
        stationarity = 0.0
        kkt = 0.0 if status is SubStatus.OPTIMAL else np.inf

        if prog is not None and x_reduced is not None and np.isfinite(t):
            vals = prog.values(x_reduced)
            mult = 1.0 / (-t * vals)
            n_quad = len(prog.quads)
            grad = 2.0 * (prog.p0 @ x_reduced) + prog.c0
            lagr = grad.copy()
            for lam, q in zip(mult[:n_quad], prog.quads):
                lagr += lam * q.gradient(x_reduced)
            lagr += prog.a.T @ mult[n_quad:]
            stationarity = float(np.max(np.abs(lagr), initial=0.0)) / max(
                1.0, float(np.max(np.abs(grad), initial=0.0))
            )
            kkt = prog.constraint_count / t

            sub = reduced.problem
            assert sub is not None
            row_norms = np.linalg.norm(sub.a, axis=1)
            duals_quad[reduced.quad_index] = mult[:n_quad]
            duals_lin[reduced.lin_index] = mult[n_quad:] / row_norms

        return SubSolution(
            x=full,
            value=problem.objective.value(full),
            status=status,
            kkt_residual=kkt,
            stationarity=stationarity,
            max_violation=problem.max_violation(full),
            duals_quad=duals_quad,
            duals_lin=duals_lin,
            newton_steps=newton_steps,
            shift=shift,
        )


def solve(
    problem: ConvexSubproblem,
    tol: float,
    solver: SubSolver | None = None,
) -> SubSolution:
    """Solve a convex subproblem with the given or default solver."""
    return (solver or BarrierSolver()).solve(problem, tol)
