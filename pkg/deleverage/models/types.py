"""Core type definitions for deleverage."""

from __future__ import annotations

from enum import Enum


class SubStatus(str, Enum):
    """Outcome of a convex subproblem solve."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERS = "max-iters"


class ScoStatus(str, Enum):
    """Outcome of a successive convex optimization run."""

    CONVERGED = "converged"
    ITER_LIMIT = "iter-limit"


class SolveStatus(str, Enum):
    """Outcome of a global solve."""

    EPS_OPTIMAL = "eps-optimal"
    TIME_LIMIT = "time-limit"
    INCOMPLETE = "incomplete"  # queue exhausted with the gap above eps
    CONVERGED = "converged"  # local solve only, no global certificate
    ITER_LIMIT = "iter-limit"


class Algorithm(str, Enum):
    """Solver selectable from the command line."""

    SCO = "sco"
    SCOBB = "scobb"
