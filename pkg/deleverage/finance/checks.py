"""Validity checks and post-solve diagnostics of a market model."""

from __future__ import annotations

import logging
import operator
from collections.abc import Callable

import numpy as np
from numpy.typing import ArrayLike

from deleverage.errors import ValidationError
from deleverage.finance.quantities import equity, leverage_constant, leverage_gap, liability
from deleverage.models.market import MarketModel, Strategy, trade_vector
from deleverage.models.reports import (
    CheckResult,
    DiagnosticReport,
    PriorityFlags,
    ValidationOutcome,
)

logger = logging.getLogger(__name__)


def validate(model: MarketModel) -> ValidationOutcome:
    """Check the invariants a deleveraging instance must satisfy.

    Positivity of prices, holdings, liability, bound and initial equity;
    the portfolio starts over-levered; full liquidation leaves negative
    liability. When full liquidation is feasible, its two consequences
    (positive equity, satisfied leverage bound) are asserted as well and a
    numerical failure of either sets ``internal_consistency_error``.

    Args:
        model: Market model to check

    Returns:
        Structured outcome listing every check
    """
    e0 = model.e0
    excess = model.l0 - model.rho1 * e0
    full_sale = -model.x0
    l_full = liability(model, full_sale)

    checks = [
        CheckResult("positive_prices", bool(np.all(model.p0 > 0)), "p0 > 0 componentwise"),
        CheckResult("positive_holdings", bool(np.all(model.x0 > 0)), "x0 > 0 componentwise"),
        CheckResult("positive_liability", model.l0 > 0, "l0 > 0", model.l0),
        CheckResult("positive_rho1", model.rho1 > 0, "rho1 > 0", model.rho1),
        CheckResult("positive_equity", e0 > 0, "e0 = p0'x0 - l0 > 0", e0),
        CheckResult("over_levered", excess > 0, "l0 - rho1*e0 > 0", excess),
        CheckResult("full_liquidation", l_full < 0, "l1(-x0) < 0", l_full),
    ]

    inconsistent = False
    if l_full < 0:
        e_full = equity(model, full_sale)
        margin = model.rho1 * e_full - l_full
        checks.append(
            CheckResult("full_liquidation_equity", e_full > 0, "e1(-x0) > 0", e_full)
        )
        checks.append(
            CheckResult(
                "full_liquidation_leverage",
                margin > 0,
                "rho1*e1(-x0) - l1(-x0) > 0",
                margin,
            )
        )
        if e_full <= 0 or margin <= 0:
            inconsistent = True
            logger.error(
                "Full liquidation has l1 = %g < 0 but e1 = %g, margin = %g", l_full, e_full, margin
            )

    return ValidationOutcome(
        checks=tuple(checks),
        l0=model.l0,
        e0=e0,
        internal_consistency_error=inconsistent,
    )


def _close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b))


def check_priority_conditions(
    model: MarketModel,
    i: int,
    j: int,
    *,
    rtol: float = 1e-12,
    strict: bool = True,
) -> PriorityFlags:
    """Evaluate the sufficient conditions for selling asset i first.

    Applies to pairs with equal initial price and holding (within
    ``rtol``); other pairs are reported as not applicable. Indices are
    zero-based.

    Conditions, with Λ̂, Γ̂ the symmetric parts and Γ the permanent impact:

    1. λ̂ii ≤ λ̂ij < λ̂jj and γ̂ii ≤ γ̂ij < γ̂jj
    2. λ̂ik ≤ λ̂jk and γ̂ik ≤ γ̂jk for every other k
    3. γii − γij ≤ γjj − γji
    4. γki − γik ≤ γkj − γjk for every other k

    Args:
        model: Market model
        i: Asset expected to be sold no less
        j: Comparison asset
        rtol: Relative tolerance of the equal price and holding test
        strict: Evaluate the strict inequalities of condition 1 as strict

    Returns:
        Per-condition flags

    Raises:
        ValidationError: If an index is out of range
    """
    m = model.m
    for name, idx in (("i", i), ("j", j)):
        if not 0 <= idx < m:
            raise ValidationError(f"{name} = {idx} outside 0..{m - 1}", field=name)

    if i == j or not (
        _close(float(model.p0[i]), float(model.p0[j]), rtol)
        and _close(float(model.x0[i]), float(model.x0[j]), rtol)
    ):
        return PriorityFlags(i=i, j=j, applicable=False)

    lam, gam, raw = model.lam_hat, model.gam_hat, model.perm_impact
    below: Callable[[float, float], bool] = operator.lt if strict else operator.le
    others = [k for k in range(m) if k not in (i, j)]

    first = bool(
        lam[i, i] <= lam[i, j]
        and below(lam[i, j], lam[j, j])
        and gam[i, i] <= gam[i, j]
        and below(gam[i, j], gam[j, j])
    )
    second = all(lam[i, k] <= lam[j, k] and gam[i, k] <= gam[j, k] for k in others)
    third = bool(raw[i, i] - raw[i, j] <= raw[j, j] - raw[j, i])
    fourth = all(raw[k, i] - raw[i, k] <= raw[k, j] - raw[j, k] for k in others)

    return PriorityFlags(
        i=i,
        j=j,
        applicable=True,
        conditions=(first, bool(second), third, bool(fourth)),
    )


def leverage_must_bind(model: MarketModel) -> bool:
    """Whether the impact structure forces the leverage bound to be active.

    Holds when both matrices are entrywise non-negative and the permanent
    impact is symmetric.
    """
    gam = model.perm_impact
    return bool(
        np.all(model.temp_impact >= 0)
        and np.all(gam >= 0)
        and np.allclose(gam, gam.T, rtol=1e-12, atol=0.0)
    )


def diagnose(
    model: MarketModel,
    y: Strategy | ArrayLike,
    *,
    rho_max: float | None = None,
    active_tol: float = 1e-6,
    rtol: float = 1e-12,
) -> DiagnosticReport:
    """Diagnose a solved strategy.

    Args:
        model: Market model
        y: Strategy to diagnose
        rho_max: Leverage ratio of the unconstrained maximizer, if computed
        active_tol: Relative tolerance for calling the leverage bound active
        rtol: Tolerance of the equal price and holding test

    Returns:
        Leverage activity, priority pairs and their outcome at y
    """
    v = trade_vector(y, model.m)
    slack = leverage_gap(model, v)
    scale = max(1.0, abs(leverage_constant(model)))

    pairs: list[PriorityFlags] = []
    respected: list[bool] = []
    for i in range(model.m):
        for j in range(model.m):
            if i == j:
                continue
            flags = check_priority_conditions(model, i, j, rtol=rtol)
            if not flags.applicable:
                continue
            pairs.append(flags)
            if flags.all_hold:
                respected.append(bool(v[i] <= v[j] + active_tol * max(1.0, float(model.x0[i]))))

    return DiagnosticReport(
        leverage_active=abs(slack) <= active_tol * scale,
        slack=slack,
        must_bind=leverage_must_bind(model),
        priority_pairs=tuple(pairs),
        priority_respected=tuple(respected),
        rho_max=rho_max,
    )


def relative_gap(opt_val: float, obj_val: float) -> float:
    """Relative gap (opt − obj) / max(1, |opt|) between two objective values."""
    return (opt_val - obj_val) / max(1.0, abs(opt_val))
