"""Structured results returned by checks and solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from deleverage.errors import InvalidModelError
from deleverage.models.market import Strategy
from deleverage.models.types import Algorithm, SolveStatus


@dataclass(frozen=True, slots=True)
class CheckResult:
    """Result of one named validity check."""

    name: str
    passed: bool
    detail: str = ""
    value: float | None = None


@dataclass(frozen=True, slots=True)
class ValidationOutcome:
    """All validity checks run against a market model."""

    checks: tuple[CheckResult, ...]
    l0: float
    e0: float
    internal_consistency_error: bool = False
    """Set when the full-liquidation consequences fail although their premise holds."""

    @property
    def ok(self) -> bool:
        """Whether every check passed."""
        return not self.internal_consistency_error and all(c.passed for c in self.checks)

    @property
    def failed(self) -> tuple[str, ...]:
        """Names of the failed checks."""
        return tuple(c.name for c in self.checks if not c.passed)

    def get(self, name: str) -> CheckResult:
        """Look up a check by name.

        Raises:
            KeyError: If no check has this name
        """
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def raise_if_invalid(self) -> None:
        """Raise InvalidModelError naming the failed checks."""
        if self.ok:
            return
        failed = self.failed or ("internal_consistency",)
        details = "; ".join(f"{c.name}: {c.detail}" for c in self.checks if not c.passed)
        raise InvalidModelError(
            f"model failed checks {', '.join(failed)}" + (f" ({details})" if details else ""),
            failed_checks=failed,
        )

    def to_dict(self) -> dict[str, Any]:
        """Serialize to a dictionary."""
        return {
            "ok": self.ok,
            "l0": self.l0,
            "e0": self.e0,
            "internal_consistency_error": self.internal_consistency_error,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail, "value": c.value}
                for c in self.checks
            ],
        }


@dataclass(frozen=True, slots=True)
class PriorityFlags:
    """Sufficient conditions for selling asset i no less than asset j."""

    i: int
    j: int
    applicable: bool
    """False when the pair does not share price and holding."""

    conditions: tuple[bool, bool, bool, bool] = (False, False, False, False)

    @property
    def all_hold(self) -> bool:
        """Whether the pair is applicable and all four conditions hold."""
        return self.applicable and all(self.conditions)

    def to_dict(self) -> dict[str, Any]:
        """Serialize to a dictionary."""
        return {
            "i": self.i,
            "j": self.j,
            "applicable": self.applicable,
            "conditions": list(self.conditions),
            "all_hold": self.all_hold,
        }


@dataclass(frozen=True, slots=True)
class DiagnosticReport:
    """Post-solve diagnostics of a strategy."""

    leverage_active: bool
    slack: float
    """Leverage gap g(y) at the strategy."""

    must_bind: bool
    """Non-negative impact with symmetric permanent impact forces an active constraint."""

    priority_pairs: tuple[PriorityFlags, ...] = ()
    priority_respected: tuple[bool, ...] = ()
    """For each pair whose conditions hold, whether y_i ≤ y_j."""

    rho_max: float | None = None

    def to_dict(self) -> dict[str, Any]:
        """Serialize to a dictionary."""
        return {
            "leverage_active": self.leverage_active,
            "slack": self.slack,
            "must_bind": self.must_bind,
            "priority_pairs": [p.to_dict() for p in self.priority_pairs],
            "priority_respected": list(self.priority_respected),
            "rho_max": self.rho_max,
        }


def _finite_or_none(value: float) -> float | None:
    return value if math.isfinite(value) else None


@dataclass(frozen=True, slots=True)
class SolveReport:
    """Outcome of a deleveraging solve.

    ``lower_bound`` and ``objective_value`` are in the minimization form
    f = e0 − e1; ``global_bound_gap`` is their difference. A local solve
    has no bound: lower_bound is −inf and serializes as null.
    """

    y_star: Strategy
    equity: float
    leverage_gap: float
    objective_value: float
    lower_bound: float
    global_bound_gap: float
    status: SolveStatus
    eps: float
    algorithm: Algorithm = Algorithm.SCOBB
    nodes_processed: int = 0
    iterations: int = 0
    sco_restarts: int = 0
    sco_iterations: int = 0
    elapsed: float = 0.0
    ranks: tuple[int, int, int] = (0, 0, 0)
    """(s, q, r) of the reformulation."""

    f_hat_trace: tuple[float, ...] = field(default_factory=tuple)

    @property
    def certified(self) -> bool:
        """Whether the status claims ε-optimality."""
        return self.status == SolveStatus.EPS_OPTIMAL

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the solution document layout."""
        s, q, r = self.ranks
        return {
            "y": self.y_star.to_list(),
            "equity": self.equity,
            "leverage_gap": self.leverage_gap,
            "status": self.status.value,
            "eps": self.eps,
            "nodes": self.nodes_processed,
            "sco_restarts": self.sco_restarts,
            "elapsed_s": self.elapsed,
            "lower_bound": _finite_or_none(self.lower_bound),
            "objective": self.objective_value,
            "global_bound_gap": _finite_or_none(self.global_bound_gap),
            "algorithm": self.algorithm.value,
            "iterations": self.iterations,
            "sco_iterations": self.sco_iterations,
            "s": s,
            "q": q,
            "r": r,
        }
