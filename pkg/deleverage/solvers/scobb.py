"""Global branch-and-bound over the concave coordinates.

Nodes are sub-boxes of the concave coordinates, bounded below by the
envelope relaxation. The incumbent comes from successive convex
optimization, restarted from promising relaxation points. The search
stops once the smallest open lower bound is within eps of the incumbent.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from numpy.typing import NDArray

from deleverage.core.config import DEFAULT_EPS, DEFAULT_TIME_LIMIT, SolverConfig, create_config
from deleverage.errors import (
    DegeneratePortfolioError,
    InfeasibleStartError,
    SubproblemError,
)
from deleverage.finance.checks import validate
from deleverage.finance.quantities import equity, leverage_gap, liability, objective
from deleverage.models.market import MarketModel, Strategy
from deleverage.models.reports import SolveReport
from deleverage.models.types import Algorithm, ScoStatus, SolveStatus, SubStatus
from deleverage.reform.congruence import DcReform, reformulate
from deleverage.solvers.barrier import BarrierSolver, SubSolution, SubSolver
from deleverage.solvers.sco import ScoResult, sco
from deleverage.solvers.subproblem import build_relaxation
from deleverage.utils.retry import RetryConfig, with_retry

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, eq=False)
class BnbNode:
    """A solved sub-box of the concave coordinates."""

    box_l: NDArray[np.float64]
    box_u: NDArray[np.float64]
    lower_bound: float
    """Relaxation value less the solver's duality measure."""

    relax_z: NDArray[np.float64]
    relax_t: NDArray[np.float64]
    depth: int = 0
    duality_measure: float = 0.0
    """Solver duality measure; lower_bound + duality_measure is the relaxation value."""

    @property
    def envelope_gaps(self) -> NDArray[np.float64]:
        """tᵢ − zᵢ² per concave coordinate."""
        k = self.box_l.shape[0]
        return self.relax_t - self.relax_z[:k] ** 2


@dataclass(frozen=True, slots=True)
class NodeTrace:
    """Progress record of one branch-and-bound iteration."""

    iteration: int
    lower_bound: float
    incumbent: float
    queue_size: int
    branch_index: int | None
    branch_point: float | None
    elapsed: float
    nodes: int = 0

    def to_dict(self) -> dict[str, Any]:
        """Serialize to a flat row."""
        return {
            "iteration": self.iteration,
            "lower_bound": self.lower_bound,
            "incumbent": self.incumbent,
            "queue_size": self.queue_size,
            "branch_index": self.branch_index,
            "branch_point": self.branch_point,
            "elapsed_s": self.elapsed,
            "nodes": self.nodes,
        }


@dataclass(frozen=True, slots=True, eq=False)
class BnbResult:
    """Raw outcome of a branch-and-bound run in z-coordinates."""

    z: NDArray[np.float64]
    value: float
    lower_bound: float
    status: SolveStatus
    nodes: int
    iterations: int
    restarts: int
    sco_iterations: int
    elapsed: float
    f_hat_trace: tuple[float, ...] = field(default_factory=tuple)


class BranchAndBound:
    """Best-first branch-and-bound with successive convex optimization restarts.

    With ``leverage=False`` the leverage constraint is dropped and only the
    objective's concave coordinates are branched on.

    Example:
        >>> engine = BranchAndBound(reformulate(model))
        >>> result = engine.run()
        >>> result.status
        <SolveStatus.EPS_OPTIMAL: 'eps-optimal'>
    """

    def __init__(
        self,
        reform: DcReform,
        *,
        leverage: bool = True,
        config: SolverConfig | None = None,
        solver: SubSolver | None = None,
        on_trace: Callable[[NodeTrace], None] | None = None,
        on_node: Callable[[BnbNode], None] | None = None,
    ) -> None:
        self.reform = reform
        self.leverage = leverage
        self.config = config or SolverConfig()
        self.config.validate()
        self.solver = solver or BarrierSolver(self.config.barrier)
        self.on_trace = on_trace
        self.on_node = on_node
        self._k = reform.r if leverage else reform.s
        self._retry = RetryConfig(
            max_attempts=self.config.bnb.max_retries + 1,
            tolerance_factor=self.config.bnb.retry_tol_factor,
        )

    @property
    def eps(self) -> float:
        """Target tolerance."""
        return self.config.bnb.eps

    # Node evaluation

    def _solve_relaxation(
        self, box_l: NDArray[np.float64], box_u: NDArray[np.float64], hint: NDArray[np.float64]
    ) -> SubSolution | None:
        problem = build_relaxation(
            self.reform, box_l, box_u, leverage=self.leverage, start=hint
        )

        def attempt(tol: float) -> SubSolution | None:
            solution = self.solver.solve(problem, tol)
            if solution.status is SubStatus.INFEASIBLE:
                return None
            if solution.status is not SubStatus.OPTIMAL:
                raise SubproblemError(
                    f"relaxation ended {solution.status.value}",
                    status=solution.status.value,
                    retryable=True,
                )
            return solution

        def on_retry(attempt_no: int, error: Exception) -> None:
            logger.warning(
                "Relaxation attempt %d failed (%s), tightening tolerance", attempt_no, error
            )

        tol = self.eps * self.config.sco.subproblem_tol_factor
        return with_retry(attempt, tol, self._retry, on_retry=on_retry)

    def _make_node(
        self,
        box_l: NDArray[np.float64],
        box_u: NDArray[np.float64],
        hint: NDArray[np.float64],
        depth: int,
    ) -> BnbNode | None:
        solution = self._solve_relaxation(box_l, box_u, hint)
        if solution is None:
            logger.debug("Relaxation infeasible at depth %d", depth)
            return None
        m = self.reform.m
        node = BnbNode(
            box_l=box_l,
            box_u=box_u,
            lower_bound=solution.value - solution.kkt_residual,
            relax_z=solution.x[:m].copy(),
            relax_t=solution.x[m:].copy(),
            depth=depth,
            duality_measure=solution.kkt_residual,
        )
        if self.on_node is not None:
            self.on_node(node)
        return node

    def _branch_point(self, node: BnbNode) -> tuple[int, float]:
        """Coordinate with the widest envelope gap and where to split it."""
        cfg = self.config.bnb
        i = int(np.argmax(node.envelope_gaps))
        lo, hi = float(node.box_l[i]), float(node.box_u[i])
        mid = 0.5 * (lo + hi)
        z, t = float(node.relax_z[i]), float(node.relax_t[i])

        above_left = t > (lo + mid) * z - lo * mid + cfg.secant_margin
        above_right = t > (mid + hi) * z - mid * hi + cfg.secant_margin
        if above_left and above_right:
            return i, mid

        width = hi - lo
        if z - lo < cfg.branch_snap * width or hi - z < cfg.branch_snap * width:
            return i, mid
        return i, z

    def _children(
        self,
        node: BnbNode,
        index: int,
        point: float,
        pool: ThreadPoolExecutor | None,
    ) -> list[BnbNode]:
        left_u = node.box_u.copy()
        left_u[index] = point
        right_l = node.box_l.copy()
        right_l[index] = point
        boxes = [(node.box_l, left_u), (right_l, node.box_u)]

        if pool is None:
            built = [self._make_node(lo, hi, node.relax_z, node.depth + 1) for lo, hi in boxes]
        else:
            futures = [
                pool.submit(self._make_node, lo, hi, node.relax_z, node.depth + 1)
                for lo, hi in boxes
            ]
            built = [f.result() for f in futures]
        return [child for child in built if child is not None]

    # Incumbent

    def _local_search(self, z0: NDArray[np.float64], start_tol: float | None) -> ScoResult:
        return sco(
            self.reform,
            z0,
            self.eps * self.config.bnb.incumbent_tol_factor,
            leverage=self.leverage,
            solver=self.solver,
            config=self.config,
            start_tol=start_tol,
        )

    def _feasible_value(self, z: NDArray[np.float64]) -> float | None:
        """f̂(z) if z is eps-feasible for the leverage constraint, else None."""
        if self.leverage and self.reform.g_hat(z) > self.eps:
            return None
        return self.reform.f_hat(z)

    def _try_restart(
        self, z: NDArray[np.float64], incumbent: float
    ) -> tuple[NDArray[np.float64], float, int] | None:
        """Restart the local search from a relaxation point if it qualifies.

        Returns:
            (point, value, sco iterations) of the better of the relaxation
            point and the local search result, or None when the point is
            not eps-feasible or does not improve by eps
        """
        value = self._feasible_value(z)
        if value is None or value > incumbent - self.eps:
            return None
        try:
            result = self._local_search(z, start_tol=self.eps)
        except (SubproblemError, InfeasibleStartError) as e:
            logger.warning("SCO restart rejected (%s), keeping the relaxation point", e)
            return z, value, 0
        if result.value < value:
            return result.z, result.value, result.iterations
        return z, value, result.iterations

    def _adopt(
        self, z: NDArray[np.float64], z_star: NDArray[np.float64], v_star: float
    ) -> tuple[NDArray[np.float64], float]:
        """Take an eps-feasible relaxation point as incumbent when it is lower."""
        value = self._feasible_value(z)
        if value is not None and value < v_star:
            logger.debug("Relaxation point lowers the incumbent to f_hat=%.10g", value)
            return z, value
        return z_star, v_star

    # Main loop

    def run(self) -> BnbResult:
        """Search until the eps-optimality certificate or the time limit.

        Returns:
            Incumbent, terminal lower bound and search statistics

        Raises:
            SubproblemError: If the initial local search fails
            RetryExhaustedError: If a relaxation fails on every retry
        """
        started = time.perf_counter()
        cfg = self.config.bnb
        eps, k = self.eps, self._k

        first = self._local_search(self.reform.start_point(), None)
        z_star, v_star = first.z, first.value
        sco_iterations = first.iterations
        restarts = 0
        logger.info("Initial SCO: f_hat=%.10g after %d iterations", v_star, first.iterations)

        pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.parallel else None
        try:
            root = self._make_node(self.reform.z_lo[:k], self.reform.z_hi[:k], z_star, 0)
            if root is None:
                raise SubproblemError("root relaxation is infeasible", status="infeasible")
            nodes = 1
            z_star, v_star = self._adopt(root.relax_z, z_star, v_star)

            counter = itertools.count()
            heap: list[tuple[float, int, BnbNode]] = [(root.lower_bound, next(counter), root)]
            floor = np.inf
            iteration = 0
            status = SolveStatus.EPS_OPTIMAL
            lower = root.lower_bound

            while True:
                elapsed = time.perf_counter() - started
                if elapsed > cfg.time_limit:
                    status = SolveStatus.TIME_LIMIT
                    lower = min(heap[0][0] if heap else np.inf, floor)
                    logger.warning("Time limit reached after %d nodes", nodes)
                    break
                if not heap:
                    lower = floor
                    if v_star - floor > eps:
                        status = SolveStatus.INCOMPLETE
                        logger.warning(
                            "Queue exhausted with gap %.3e above eps", v_star - floor
                        )
                    break

                v_k, _, node = heapq.heappop(heap)
                iteration += 1
                if v_k >= v_star - eps:
                    lower = min(v_k, floor)
                    self._emit(iteration, v_k, v_star, len(heap), None, None, started, nodes)
                    break
                if k == 0:
                    # nothing to branch on; the relaxation is the problem itself
                    lower = min(v_k, floor)
                    z_star, v_star = self._adopt(node.relax_z, z_star, v_star)
                    break

                index, point = self._branch_point(node)
                if not node.box_l[index] < point < node.box_u[index]:
                    z_star, v_star = self._adopt(node.relax_z, z_star, v_star)
                    floor = min(floor, v_k)
                    continue

                children = self._children(node, index, point, pool)
                nodes += 2

                if children:
                    best = min(children, key=lambda c: self.reform.f_hat(c.relax_z))
                    candidate = self._try_restart(best.relax_z, v_star)
                    if candidate is not None:
                        restarts += 1
                        sco_iterations += candidate[2]
                        if candidate[1] < v_star:
                            z_star, v_star = candidate[0], candidate[1]
                            logger.info("Incumbent improved to f_hat=%.10g", v_star)
                    for child in children:
                        z_star, v_star = self._adopt(child.relax_z, z_star, v_star)

                for child in children:
                    heapq.heappush(heap, (child.lower_bound, next(counter), child))

                kept = []
                for entry in heap:
                    if entry[0] >= v_star - eps:
                        floor = min(floor, entry[0])
                    else:
                        kept.append(entry)
                if len(kept) != len(heap):
                    heap = kept
                    heapq.heapify(heap)

                self._emit(iteration, v_k, v_star, len(heap), index, point, started, nodes)
        finally:
            if pool is not None:
                pool.shutdown(wait=True)

        lower = min(lower, v_star)
        elapsed = time.perf_counter() - started
        logger.info(
            "Branch-and-bound %s: f_hat=%.10g lower=%.10g nodes=%d restarts=%d",
            status.value,
            v_star,
            lower,
            nodes,
            restarts,
        )
        return BnbResult(
            z=z_star,
            value=v_star,
            lower_bound=lower,
            status=status,
            nodes=nodes,
            iterations=iteration,
            restarts=restarts,
            sco_iterations=sco_iterations,
            elapsed=elapsed,
            f_hat_trace=first.f_hat_trace,
        )

    def _emit(
        self,
        iteration: int,
        lower: float,
        incumbent: float,
        queue: int,
        index: int | None,
        point: float | None,
        started: float,
        nodes: int,
    ) -> None:
        trace = NodeTrace(
            iteration=iteration,
            lower_bound=lower,
            incumbent=incumbent,
            queue_size=queue,
            branch_index=index,
            branch_point=point,
            elapsed=time.perf_counter() - started,
            nodes=nodes,
        )
        logger.debug(
            "Node %d: lower=%.10g incumbent=%.10g queue=%d branch=%s",
            iteration,
            lower,
            incumbent,
            queue,
            index,
        )
        if self.on_trace is not None:
            self.on_trace(trace)


def _resolve_config(
    config: SolverConfig | None, eps: float | None, time_limit: float | None
) -> SolverConfig:
    if config is None:
        config = create_config()
    bnb = config.bnb
    if eps is not None:
        bnb = replace(bnb, eps=eps)
    if time_limit is not None:
        bnb = replace(bnb, time_limit=time_limit)
    resolved = replace(config, bnb=bnb)
    resolved.validate()
    return resolved


def build_report(
    reform: DcReform,
    z: NDArray[np.float64],
    *,
    lower_bound: float,
    status: SolveStatus,
    eps: float,
    algorithm: Algorithm,
    nodes: int = 0,
    iterations: int = 0,
    restarts: int = 0,
    sco_iterations: int = 0,
    elapsed: float = 0.0,
    f_hat_trace: tuple[float, ...] = (),
) -> SolveReport:
    """Map a point in z-coordinates to a clipped strategy and its report."""
    model = reform.model
    y = reform.to_strategy(z).clipped(model.x0)
    loss = objective(model, y)
    return SolveReport(
        y_star=y,
        equity=equity(model, y),
        leverage_gap=leverage_gap(model, y),
        objective_value=loss,
        lower_bound=lower_bound,
        global_bound_gap=loss - lower_bound,
        status=status,
        eps=eps,
        algorithm=algorithm,
        nodes_processed=nodes,
        iterations=iterations,
        sco_restarts=restarts,
        sco_iterations=sco_iterations,
        elapsed=elapsed,
        ranks=reform.ranks,
        f_hat_trace=f_hat_trace,
    )


def scobb(
    model: MarketModel,
    eps: float | None = None,
    time_limit: float | None = None,
    *,
    config: SolverConfig | None = None,
    solver: SubSolver | None = None,
    on_trace: Callable[[NodeTrace], None] | None = None,
    on_node: Callable[[BnbNode], None] | None = None,
) -> SolveReport:
    """Solve the deleveraging problem to global eps-optimality.

    Args:
        model: Market model; must pass validation
        eps: Optimality and feasibility tolerance (config value if None)
        time_limit: Wall-clock budget in seconds (config value if None)
        config: Solver configuration (uses defaults if None)
        solver: Subproblem solver (barrier method if None)
        on_trace: Called with a NodeTrace after every iteration
        on_node: Called with every solved node

    Returns:
        Report with the clipped incumbent, its equity and the certificate

    Raises:
        InvalidModelError: If the model fails validation
        ReformError: If the reformulation fails
        RetryExhaustedError: If a node relaxation fails on every retry
    """
    validate(model).raise_if_invalid()
    cfg = _resolve_config(config, eps, time_limit)
    reform = reformulate(model, cfg.reform)
    engine = BranchAndBound(reform, config=cfg, solver=solver, on_trace=on_trace, on_node=on_node)
    result = engine.run()
    return build_report(
        reform,
        result.z,
        lower_bound=result.lower_bound,
        status=result.status,
        eps=cfg.bnb.eps,
        algorithm=Algorithm.SCOBB,
        nodes=result.nodes,
        iterations=result.iterations,
        restarts=result.restarts,
        sco_iterations=result.sco_iterations,
        elapsed=result.elapsed,
        f_hat_trace=result.f_hat_trace,
    )


def solve_local(
    model: MarketModel,
    eps: float | None = None,
    *,
    config: SolverConfig | None = None,
    solver: SubSolver | None = None,
) -> SolveReport:
    """Run successive convex optimization from full liquidation and report it.

    A local solve proves no bound: the report carries lower_bound = −inf
    and never passes ``certify``.
    """
    validate(model).raise_if_invalid()
    cfg = _resolve_config(config, eps, None)
    reform = reformulate(model, cfg.reform)
    started = time.perf_counter()
    result = sco(reform, None, cfg.bnb.eps, solver=solver, config=cfg)
    status = (
        SolveStatus.CONVERGED if result.status is ScoStatus.CONVERGED else SolveStatus.ITER_LIMIT
    )
    return build_report(
        reform,
        result.z,
        lower_bound=-np.inf,
        status=status,
        eps=cfg.bnb.eps,
        algorithm=Algorithm.SCO,
        iterations=result.iterations,
        sco_iterations=result.iterations,
        elapsed=time.perf_counter() - started,
        f_hat_trace=result.f_hat_trace,
    )


def solve_model(
    model: MarketModel,
    algorithm: Algorithm = Algorithm.SCOBB,
    **kwargs: Any,
) -> SolveReport:
    """Dispatch to the local or the global solver."""
    if algorithm is Algorithm.SCO:
        kwargs.pop("time_limit", None)
        kwargs.pop("on_trace", None)
        kwargs.pop("on_node", None)
        return solve_local(model, **kwargs)
    return scobb(model, **kwargs)


def certify(report: SolveReport, model: MarketModel, eps: float | None = None) -> bool:
    """Recheck a report's eps-optimality certificate against the model.

    True iff the report claims eps-optimality and both the leverage gap at
    the reported strategy and its objective minus the reported lower bound
    are at most eps. Local solves never certify.
    """
    if report.status is not SolveStatus.EPS_OPTIMAL or not np.isfinite(report.lower_bound):
        return False
    tol = report.eps if eps is None else eps
    y = report.y_star
    return bool(
        leverage_gap(model, y) <= tol and objective(model, y) - report.lower_bound <= tol
    )


def rho_max(
    model: MarketModel,
    eps: float | None = None,
    time_limit: float | None = None,
    *,
    config: SolverConfig | None = None,
    solver: SubSolver | None = None,
) -> float:
    """Leverage ratio at the equity-maximizing strategy without a leverage bound.

    Bounds ρ1 above which the leverage constraint cannot bind. When no
    sale raises equity by more than eps, the maximizer is taken to be
    y = 0.

    Raises:
        InvalidModelError: If the model fails validation
        DegeneratePortfolioError: If the maximizer leaves non-positive equity
    """
    validate(model).raise_if_invalid()
    cfg = _resolve_config(config, eps, time_limit)
    reform = reformulate(model, cfg.reform)
    result = BranchAndBound(reform, leverage=False, config=cfg, solver=solver).run()

    if result.value >= -cfg.bnb.eps:
        y = Strategy(np.zeros(model.m))
    else:
        y = reform.to_strategy(result.z).clipped(model.x0)
    e1 = equity(model, y)
    if e1 <= 0:
        raise DegeneratePortfolioError(
            f"equity-maximizing strategy leaves equity {e1:.6g}", equity=e1
        )
    ratio = liability(model, y) / e1
    logger.info("rho_max = %.6g (%s)", ratio, result.status.value)
    return ratio


def rho_sweep(
    model: MarketModel,
    rhos: Iterable[float],
    eps: float | None = None,
    time_limit: float | None = None,
    *,
    config: SolverConfig | None = None,
) -> list[tuple[float, SolveReport]]:
    """Solve the model once per leverage bound.

    Returns:
        (ρ1, report) pairs in input order
    """
    out = []
    for rho in rhos:
        logger.info("Solving with rho1 = %g", rho)
        out.append((float(rho), scobb(model.with_rho1(rho), eps, time_limit, config=config)))
    return out
