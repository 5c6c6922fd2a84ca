"""Subproblem, local and global solvers."""

from deleverage.solvers.barrier import BarrierSolver, SubSolution, SubSolver, solve
from deleverage.solvers.oracle import GridSpec, grid_resolution, grid_search, lipschitz_bound
from deleverage.solvers.sco import ScoResult, kkt_residual, sco
from deleverage.solvers.scobb import (
    BnbNode,
    BnbResult,
    BranchAndBound,
    NodeTrace,
    build_report,
    certify,
    rho_max,
    rho_sweep,
    scobb,
    solve_local,
    solve_model,
)
from deleverage.solvers.subproblem import (
    ConvexSubproblem,
    QuadForm,
    ReducedProblem,
    build_linearized,
    build_relaxation,
)

__all__ = [
    # Subproblems
    "QuadForm",
    "ConvexSubproblem",
    "ReducedProblem",
    "build_linearized",
    "build_relaxation",
    # Subproblem solver
    "SubSolver",
    "SubSolution",
    "BarrierSolver",
    "solve",
    # Local
    "ScoResult",
    "sco",
    "kkt_residual",
    # Global
    "BnbNode",
    "BnbResult",
    "BranchAndBound",
    "NodeTrace",
    "build_report",
    "certify",
    "rho_max",
    "rho_sweep",
    "scobb",
    "solve_local",
    "solve_model",
    # Oracle
    "GridSpec",
    "grid_search",
    "grid_resolution",
    "lipschitz_bound",
]
