"""Solver configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from deleverage.errors import ConfigurationError

DEFAULT_EPS = 1e-5
"""Stopping parameter for SCO and the branch-and-bound."""

DEFAULT_TIME_LIMIT = 3600.0
"""Wall-clock budget of a global solve, in seconds."""


@dataclass(frozen=True, slots=True)
class ReformConfig:
    """Configuration for the spectral split and congruence construction."""

    tol_zero: float = 1e-10
    """Eigenvalues with |λ| at most this multiple of the spectral norm count as zero."""

    cond_warning: float = 1e10
    """Log a warning when the condition number of D exceeds this."""

    def validate(self) -> None:
        """Validate configuration values."""
        if not 0 < self.tol_zero < 1:
            raise ConfigurationError(f"tol_zero must be in (0, 1), got {self.tol_zero}")
        if self.cond_warning <= 1:
            raise ConfigurationError(
                f"cond_warning must be greater than 1, got {self.cond_warning}"
            )


@dataclass(frozen=True, slots=True)
class BarrierConfig:
    """Configuration for the interior-point subproblem solver."""

    mu: float = 10.0
    """Factor by which the barrier weight grows between centering steps."""

    max_newton_steps: int = 200
    """Newton step budget per phase. Exhaustion returns the best iterate."""

    newton_tol: float = 1e-10
    """Centering stops once half the squared Newton decrement drops below this."""

    armijo: float = 0.01
    """Sufficient-decrease fraction of the backtracking line search."""

    backtrack: float = 0.5
    """Step shrink factor of the backtracking line search."""

    t0: float = 1.0
    """Initial barrier weight."""

    def validate(self) -> None:
        """Validate configuration values."""
        if self.mu <= 1:
            raise ConfigurationError(f"mu must be greater than 1, got {self.mu}")
        if self.max_newton_steps <= 0:
            raise ConfigurationError(
                f"max_newton_steps must be positive, got {self.max_newton_steps}"
            )
        if self.newton_tol <= 0:
            raise ConfigurationError(f"newton_tol must be positive, got {self.newton_tol}")
        if not 0 < self.armijo < 0.5:
            raise ConfigurationError(f"armijo must be in (0, 0.5), got {self.armijo}")
        if not 0 < self.backtrack < 1:
            raise ConfigurationError(f"backtrack must be in (0, 1), got {self.backtrack}")
        if self.t0 <= 0:
            raise ConfigurationError(f"t0 must be positive, got {self.t0}")


@dataclass(frozen=True, slots=True)
class ScoConfig:
    """Configuration for successive convex optimization."""

    max_iter: int = 500
    """Iteration cap. Reaching it ends the run with status iter-limit."""

    subproblem_tol_factor: float = 0.1
    """Subproblem tolerance as a fraction of eps."""

    def validate(self) -> None:
        """Validate configuration values."""
        if self.max_iter <= 0:
            raise ConfigurationError(f"max_iter must be positive, got {self.max_iter}")
        if not 0 < self.subproblem_tol_factor <= 1:
            raise ConfigurationError(
                f"subproblem_tol_factor must be in (0, 1], got {self.subproblem_tol_factor}"
            )


@dataclass(frozen=True, slots=True)
class BnbConfig:
    """Configuration for the global branch-and-bound."""

    eps: float = DEFAULT_EPS
    """Target optimality and feasibility tolerance."""

    time_limit: float = DEFAULT_TIME_LIMIT
    """Wall-clock budget in seconds."""

    parallel: bool = False
    """Solve the two child relaxations of a node concurrently."""

    workers: int = 2
    """Thread count in parallel mode."""

    branch_snap: float = 1e-6
    """Branch points closer than this fraction of the width to an edge move to the midpoint."""

    secant_margin: float = 1e-10
    """Margin of the strict test for lying above both child secants."""

    max_retries: int = 3
    """Retries of a failing node relaxation before giving up."""

    retry_tol_factor: float = 0.1
    """Tolerance multiplier applied on every retry."""

    incumbent_tol_factor: float = 0.1
    """SCO step tolerance inside the search as a fraction of eps."""

    def validate(self) -> None:
        """Validate configuration values."""
        if self.eps <= 0:
            raise ConfigurationError(f"eps must be positive, got {self.eps}")
        if self.time_limit <= 0:
            raise ConfigurationError(f"time_limit must be positive, got {self.time_limit}")
        if self.workers <= 0:
            raise ConfigurationError(f"workers must be positive, got {self.workers}")
        if not 0 <= self.branch_snap < 0.5:
            raise ConfigurationError(f"branch_snap must be in [0, 0.5), got {self.branch_snap}")
        if self.secant_margin < 0:
            raise ConfigurationError(
                f"secant_margin must be non-negative, got {self.secant_margin}"
            )
        if self.max_retries < 0:
            raise ConfigurationError(f"max_retries must be non-negative, got {self.max_retries}")
        if not 0 < self.retry_tol_factor <= 1:
            raise ConfigurationError(
                f"retry_tol_factor must be in (0, 1], got {self.retry_tol_factor}"
            )
        if not 0 < self.incumbent_tol_factor <= 1:
            raise ConfigurationError(
                f"incumbent_tol_factor must be in (0, 1], got {self.incumbent_tol_factor}"
            )


@dataclass(frozen=True, slots=True)
class SolverConfig:
    """Main configuration for the deleveraging solvers.

    Groups the per-stage settings so one object can be threaded through a
    whole solve.
    """

    reform: ReformConfig = field(default_factory=ReformConfig)
    """Reformulation settings."""

    barrier: BarrierConfig = field(default_factory=BarrierConfig)
    """Subproblem solver settings."""

    sco: ScoConfig = field(default_factory=ScoConfig)
    """Local solver settings."""

    bnb: BnbConfig = field(default_factory=BnbConfig)
    """Global solver settings."""

    def validate(self) -> None:
        """Validate the entire configuration.

        Raises:
            ConfigurationError: If configuration is invalid
        """
        self.reform.validate()
        self.barrier.validate()
        self.sco.validate()
        self.bnb.validate()

    def to_dict(self) -> dict[str, Any]:
        """Serialize configuration to dictionary."""
        return {
            "reform": {
                "tol_zero": self.reform.tol_zero,
                "cond_warning": self.reform.cond_warning,
            },
            "barrier": {
                "mu": self.barrier.mu,
                "max_newton_steps": self.barrier.max_newton_steps,
                "newton_tol": self.barrier.newton_tol,
                "armijo": self.barrier.armijo,
                "backtrack": self.barrier.backtrack,
                "t0": self.barrier.t0,
            },
            "sco": {
                "max_iter": self.sco.max_iter,
                "subproblem_tol_factor": self.sco.subproblem_tol_factor,
            },
            "bnb": {
                "eps": self.bnb.eps,
                "time_limit": self.bnb.time_limit,
                "parallel": self.bnb.parallel,
                "workers": self.bnb.workers,
                "branch_snap": self.bnb.branch_snap,
                "secant_margin": self.bnb.secant_margin,
                "max_retries": self.bnb.max_retries,
                "retry_tol_factor": self.bnb.retry_tol_factor,
                "incumbent_tol_factor": self.bnb.incumbent_tol_factor,
            },
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SolverConfig:
        """Deserialize configuration from dictionary.

        Unknown sections are ignored; missing keys keep their defaults.
        """
        return cls(
            reform=ReformConfig(**data.get("reform", {})),
            barrier=BarrierConfig(**data.get("barrier", {})),
            sco=ScoConfig(**data.get("sco", {})),
            bnb=BnbConfig(**data.get("bnb", {})),
        )


def create_config(**kwargs: Any) -> SolverConfig:
    """Create a configuration with custom settings.

    Keyword names address a field of one of the sections (``eps``,
    ``time_limit``, ``mu``, ``max_iter``, ...). Names are unique across
    sections.

    Args:
        **kwargs: Field overrides

    Returns:
        Validated SolverConfig

    Raises:
        ConfigurationError: If a name is unknown or a value is invalid
    """
    sections: dict[str, dict[str, Any]] = {"reform": {}, "barrier": {}, "sco": {}, "bnb": {}}
    owners = {
        "reform": ReformConfig.__dataclass_fields__,
        "barrier": BarrierConfig.__dataclass_fields__,
        "sco": ScoConfig.__dataclass_fields__,
        "bnb": BnbConfig.__dataclass_fields__,
    }
    for key, value in kwargs.items():
        for section, fields in owners.items():
            if key in fields:
                sections[section][key] = value
                break
        else:
            raise ConfigurationError(f"Unknown configuration option: {key}")

    config = SolverConfig.from_dict(sections)
    config.validate()
    return config
