"""deleverage - Optimal portfolio deleveraging under price impact.

Finds the trades that maximize post-trade equity subject to a
debt-to-equity bound when trading moves prices through temporary and
permanent cross-impact matrices, with a certificate of global
eps-optimality.

Example:
    >>> import numpy as np
    >>> from deleverage import MarketModel, scobb
    >>>
    >>> model = MarketModel(
    ...     temp_impact=np.diag([0.2, 0.3]),
    ...     perm_impact=np.diag([0.1, 0.1]),
    ...     p0=np.array([1.0, 1.0]),
    ...     x0=np.array([1.0, 1.0]),
    ...     l0=1.9,
    ...     rho1=5.0,
    ... )
    >>> report = scobb(model, eps=1e-6)
    >>> print(report.status.value, round(report.equity, 4))
"""

from deleverage.core import (
    BarrierConfig,
    BnbConfig,
    ReformConfig,
    ScoConfig,
    SolverConfig,
    create_config,
)
from deleverage.errors import (
    ConfigurationError,
    DegeneratePortfolioError,
    DeleverageError,
    EstimationError,
    GenerationError,
    InfeasibleStartError,
    InstanceFormatError,
    InvalidModelError,
    ReformError,
    RetryExhaustedError,
    SubproblemError,
    ValidationError,
)
from deleverage.estimation import TradePanel, bucketize, fit, simulate_events
from deleverage.finance import diagnose, equity, leverage_gap, objective, validate
from deleverage.generation import GenSpec, generate
from deleverage.models import (
    Algorithm,
    MarketModel,
    ScoStatus,
    SolveReport,
    SolveStatus,
    Strategy,
    SubStatus,
)
from deleverage.reform import DcReform, reformulate
from deleverage.solvers import (
    BarrierSolver,
    SubSolver,
    certify,
    grid_search,
    rho_max,
    rho_sweep,
    sco,
    scobb,
    solve_local,
    solve_model,
)

__version__ = "0.1.0"

__all__ = [
    # Solvers
    "scobb",
    "sco",
    "solve_local",
    "solve_model",
    "certify",
    "rho_max",
    "rho_sweep",
    "grid_search",
    "BarrierSolver",
    "SubSolver",
    # Configuration
    "SolverConfig",
    "ReformConfig",
    "BarrierConfig",
    "ScoConfig",
    "BnbConfig",
    "create_config",
    # Models
    "MarketModel",
    "Strategy",
    "SolveReport",
    "DcReform",
    "reformulate",
    # Finance
    "validate",
    "diagnose",
    "equity",
    "leverage_gap",
    "objective",
    # Estimation and generation
    "TradePanel",
    "bucketize",
    "fit",
    "simulate_events",
    "GenSpec",
    "generate",
    # Enums
    "Algorithm",
    "ScoStatus",
    "SolveStatus",
    "SubStatus",
    # Errors
    "DeleverageError",
    "ConfigurationError",
    "ValidationError",
    "InfeasibleStartError",
    "InvalidModelError",
    "InstanceFormatError",
    "ReformError",
    "SubproblemError",
    "RetryExhaustedError",
    "DegeneratePortfolioError",
    "GenerationError",
    "EstimationError",
]
