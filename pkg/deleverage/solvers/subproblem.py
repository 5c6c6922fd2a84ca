"""Convex subproblems: the linearized approximation and the envelope relaxation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from deleverage.errors import ValidationError
from deleverage.reform.congruence import DcReform
from deleverage.utils.validation import validate_box, validate_vector

# Relative width under which a box coordinate is treated as a point.
_DEGENERATE_WIDTH = 1e-14

# Slack allowed when checking that points and boxes respect the z-bounds.
_BOUND_SLACK = 1e-8


def _check_psd(p: NDArray[np.float64], tol: float, name: str) -> None:
    if not p.size:
        return
    off = p - np.diag(np.diag(p))
    vals = np.diag(p) if not np.any(off) else np.linalg.eigvalsh(p)
    norm = float(np.max(np.abs(vals)))
    if float(np.min(vals)) < -tol * max(norm, np.finfo(float).tiny):
        raise ValidationError(
            f"{name} is not positive semidefinite (min eigenvalue {np.min(vals):.3e})",
            field=name,
        )


@dataclass(frozen=True, slots=True, eq=False)
class QuadForm:
    """The function xᵀPx + cᵀx + d with symmetric P."""

    p: NDArray[np.float64]
    c: NDArray[np.float64]
    d: float = 0.0

    def __post_init__(self) -> None:
        c = validate_vector(self.c, field="c")
        p = np.array(self.p, dtype=np.float64)
        if p.shape != (c.shape[0], c.shape[0]):
            raise ValidationError(
                f"quadratic term has shape {p.shape}, expected {(c.shape[0], c.shape[0])}",
                field="p",
            )
        object.__setattr__(self, "p", 0.5 * (p + p.T))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", float(self.d))

    @property
    def n(self) -> int:
        """Number of variables."""
        return int(self.c.shape[0])

    def value(self, x: NDArray[np.float64]) -> float:
        """Evaluate at x."""
        return float(x @ self.p @ x + self.c @ x + self.d)

    def gradient(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        """Gradient at x."""
        return 2.0 * (self.p @ x) + self.c

    def restrict(
        self, free: NDArray[np.intp], base: NDArray[np.float64]
    ) -> QuadForm:
        """Substitute x = base + (free coordinates), keeping only the free ones."""
        p_free = self.p[np.ix_(free, free)]
        c_free = self.c[free] + 2.0 * (self.p[free, :] @ base)
        return QuadForm(p_free, c_free, self.value(base))


@dataclass(frozen=True, slots=True, eq=False)
class ConvexSubproblem:
    """Minimize a convex quadratic subject to convex quadratic and linear rows.

    Quadratic constraints read ``q(x) ≤ 0``; linear rows read
    ``lin_a @ x ≤ lin_b``. ``fixed`` pins coordinates to values and is
    eliminated before solving. ``start`` is a hint for the feasibility phase.
    """

    objective: QuadForm
    quad_constraints: tuple[QuadForm, ...] = ()
    lin_a: NDArray[np.float64] | None = None
    lin_b: NDArray[np.float64] | None = None
    start: NDArray[np.float64] | None = None
    fixed: tuple[tuple[int, float], ...] = field(default_factory=tuple)
    psd_tol: float = 1e-9

    def __post_init__(self) -> None:
        n = self.objective.n
        a = np.zeros((0, n)) if self.lin_a is None else np.array(self.lin_a, dtype=np.float64)
        b = np.zeros(0) if self.lin_b is None else validate_vector(self.lin_b, field="lin_b")
        if a.ndim != 2 or a.shape[1] != n or a.shape[0] != b.shape[0]:
            raise ValidationError(
                f"linear rows have shape {a.shape} with {b.shape[0]} bounds for {n} variables",
                field="lin_a",
            )
        object.__setattr__(self, "lin_a", a)
        object.__setattr__(self, "lin_b", b)
        object.__setattr__(self, "quad_constraints", tuple(self.quad_constraints))

        _check_psd(self.objective.p, self.psd_tol, "objective")
        for k, q in enumerate(self.quad_constraints):
            if q.n != n:
                raise ValidationError(
                    f"constraint {k} has {q.n} variables, expected {n}",
                    field="quad_constraints",
                )
            _check_psd(q.p, self.psd_tol, f"quad_constraints[{k}]")

        if self.start is not None:
            object.__setattr__(self, "start", validate_vector(self.start, n, field="start"))
        for idx, _ in self.fixed:
            if not 0 <= idx < n:
                raise ValidationError(f"fixed index {idx} outside 0..{n - 1}", field="fixed")

    @property
    def n(self) -> int:
        """Number of variables."""
        return self.objective.n

    @property
    def a(self) -> NDArray[np.float64]:
        """Linear row matrix."""
        assert self.lin_a is not None
        return self.lin_a

    @property
    def b(self) -> NDArray[np.float64]:
        """Linear row bounds."""
        assert self.lin_b is not None
        return self.lin_b

    @property
    def constraint_count(self) -> int:
        """Number of inequality constraints."""
        return len(self.quad_constraints) + int(self.b.shape[0])

    def max_violation(self, x: NDArray[np.float64]) -> float:
        """Largest constraint violation; linear rows are measured per unit row norm."""
        worst = 0.0
        for q in self.quad_constraints:
            worst = max(worst, q.value(x))
        if self.b.size:
            norms = np.maximum(np.linalg.norm(self.a, axis=1), np.finfo(float).tiny)
            worst = max(worst, float(np.max((self.a @ x - self.b) / norms)))
        return worst

    def reduced(self) -> ReducedProblem:
        """Eliminate the fixed coordinates.

        Constraints that become constant are dropped; their largest
        violation is reported on the result.
        """
        n = self.n
        base = np.zeros(n)
        pinned = np.zeros(n, dtype=bool)
        for idx, value in self.fixed:
            base[idx] = value
            pinned[idx] = True
        free = np.flatnonzero(~pinned)

        constant_violation = 0.0
        quads: list[QuadForm] = []
        kept: list[int] = []
        for k, q in enumerate(self.quad_constraints):
            rq = q.restrict(free, base)
            if np.any(rq.p) or np.any(rq.c):
                quads.append(rq)
                kept.append(k)
            else:
                constant_violation = max(constant_violation, rq.d)

        a_free = self.a[:, free]
        rhs = self.b - self.a @ base
        live = np.any(a_free != 0.0, axis=1)
        if np.any(~live):
            norms = np.maximum(np.linalg.norm(self.a[~live], axis=1), np.finfo(float).tiny)
            constant_violation = max(constant_violation, float(np.max(-rhs[~live] / norms)))

        problem = None
        if free.size:
            problem = ConvexSubproblem(
                objective=self.objective.restrict(free, base),
                quad_constraints=tuple(quads),
                lin_a=a_free[live],
                lin_b=rhs[live],
                start=None if self.start is None else self.start[free],
                psd_tol=self.psd_tol,
            )
        return ReducedProblem(
            problem=problem,
            free=free,
            base=base,
            constant_violation=constant_violation,
            quad_index=np.array(kept, dtype=np.intp),
            lin_index=np.flatnonzero(live),
        )


@dataclass(frozen=True, slots=True, eq=False)
class ReducedProblem:
    """A subproblem with its fixed coordinates substituted out."""

    problem: ConvexSubproblem | None
    """None when every coordinate is fixed."""

    free: NDArray[np.intp]
    base: NDArray[np.float64]
    constant_violation: float
    quad_index: NDArray[np.intp]
    """Positions of the kept quadratic constraints in the original problem."""

    lin_index: NDArray[np.intp]
    """Positions of the kept linear rows in the original problem."""

    def embed(self, w: NDArray[np.float64]) -> NDArray[np.float64]:
        """Lift a point of the reduced problem back to full length."""
        x = self.base.copy()
        x[self.free] = w
        return x


def _y_box_rows(
    reform: DcReform, n: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Rows of −x0 ≤ Dz ≤ 0 padded to n variables."""
    m = reform.m
    a = np.zeros((2 * m, n))
    a[:m, :m] = reform.d
    a[m:, :m] = -reform.d
    b = np.concatenate([np.zeros(m), reform.model.x0])
    return a, b


def _branch_count(reform: DcReform, leverage: bool) -> int:
    return reform.r if leverage else reform.s


def build_linearized(
    reform: DcReform,
    xi: ArrayLike,
    *,
    leverage: bool = True,
    start: ArrayLike | None = None,
) -> ConvexSubproblem:
    """Convex majorant of the transformed problem around ξ.

    Each concave term −zᵢ² is replaced by its tangent −2ξᵢzᵢ + ξᵢ², which
    overestimates it, so the built problem's feasible set lies inside the
    true one and its objective majorizes f̂.

    Args:
        reform: Transformed problem
        xi: Linearization point on the first r coordinates (first s when
            ``leverage`` is False)
        leverage: Keep the leverage constraint
        start: Feasibility-phase hint

    Returns:
        Convex subproblem in z

    Raises:
        ValidationError: If ξ lies outside the z-bounds
    """
    k = _branch_count(reform, leverage)
    point = validate_vector(xi, k, field="xi")
    lo, hi = reform.z_lo[:k], reform.z_hi[:k]
    slack = _BOUND_SLACK * np.maximum(1.0, hi - lo)
    if np.any(point < lo - slack) or np.any(point > hi + slack):
        raise ValidationError("xi lies outside the z-bounds", field="xi")

    m, s, r = reform.m, reform.s, reform.r
    delta = reform.delta

    obj_c = reform.lin_f.copy()
    obj_c[:s] -= 2.0 * delta * point[:s]
    objective = QuadForm(reform.h_plus, obj_c, float(delta @ point[:s] ** 2))

    quads: tuple[QuadForm, ...] = ()
    if leverage:
        rho = reform.rho1
        c = reform.lin_g.copy()
        c[:r] -= 2.0 * reform.theta * point[:r]
        c[:s] -= 2.0 * rho * delta * point[:s]
        d = reform.const_g + float(reform.theta @ point[:r] ** 2) + rho * float(
            delta @ point[:s] ** 2
        )
        quads = (QuadForm(reform.g_plus, c, d),)

    a, b = _y_box_rows(reform, m)
    return ConvexSubproblem(
        objective=objective,
        quad_constraints=quads,
        lin_a=a,
        lin_b=b,
        start=None if start is None else validate_vector(start, m, field="start"),
    )


def build_relaxation(
    reform: DcReform,
    box_l: ArrayLike,
    box_u: ArrayLike,
    *,
    leverage: bool = True,
    start: ArrayLike | None = None,
) -> ConvexSubproblem:
    """Envelope relaxation of the transformed problem over a sub-box.

    Variables are (z, t) with one tᵢ per branching coordinate, bounded by
    zᵢ² ≤ tᵢ and the secant tᵢ ≤ (lᵢ + uᵢ)zᵢ − lᵢuᵢ. Each concave −zᵢ²
    becomes −tᵢ. Coordinates with lᵢ = uᵢ are fixed at (lᵢ, lᵢ²).

    Args:
        reform: Transformed problem
        box_l: Lower bounds on the branching coordinates
        box_u: Upper bounds on the branching coordinates
        leverage: Keep the leverage constraint (r branching coordinates);
            otherwise only the objective envelopes (s coordinates)
        start: z hint for the feasibility phase

    Returns:
        Convex subproblem in (z, t)

    Raises:
        ValidationError: If the box is empty or leaves the z-bounds
    """
    k = _branch_count(reform, leverage)
    lo, hi = validate_box(box_l, box_u, k)
    bound_lo, bound_hi = reform.z_lo[:k], reform.z_hi[:k]
    slack = _BOUND_SLACK * np.maximum(1.0, bound_hi - bound_lo)
    if np.any(lo < bound_lo - slack) or np.any(hi > bound_hi + slack):
        raise ValidationError("box leaves the z-bounds", field="box")

    m, s = reform.m, reform.s
    n = m + k
    delta = reform.delta

    p_obj = np.zeros((n, n))
    p_obj[:m, :m] = reform.h_plus
    c_obj = np.zeros(n)
    c_obj[:m] = reform.lin_f
    c_obj[m : m + s] = -delta
    objective = QuadForm(p_obj, c_obj, 0.0)

    quads: list[QuadForm] = []
    if leverage:
        p = np.zeros((n, n))
        p[:m, :m] = reform.g_plus
        c = np.zeros(n)
        c[:m] = reform.lin_g
        c[m:] -= reform.theta
        c[m : m + s] -= reform.rho1 * delta
        quads.append(QuadForm(p, c, reform.const_g))
    for i in range(k):
        p = np.zeros((n, n))
        p[i, i] = 1.0
        c = np.zeros(n)
        c[m + i] = -1.0
        quads.append(QuadForm(p, c, 0.0))

    box_a, box_b = _y_box_rows(reform, n)
    bound_rows = np.zeros((2 * k, n))
    secant_rows = np.zeros((k, n))
    for i in range(k):
        bound_rows[i, i] = 1.0
        bound_rows[k + i, i] = -1.0
        secant_rows[i, m + i] = 1.0
        secant_rows[i, i] = -(lo[i] + hi[i])
    a = np.vstack([box_a, bound_rows, secant_rows])
    b = np.concatenate([box_b, hi, -lo, -lo * hi])

    fixed: list[tuple[int, float]] = []
    for i in range(k):
        if hi[i] - lo[i] <= _DEGENERATE_WIDTH * max(1.0, abs(lo[i]), abs(hi[i])):
            fixed.append((i, float(lo[i])))
            fixed.append((m + i, float(lo[i]) ** 2))

    z0 = (
        reform.d_inv @ (-0.5 * reform.model.x0)
        if start is None
        else validate_vector(start, m, field="start").copy()
    )
    z0[:k] = np.clip(z0[:k], lo, hi)
    t0 = 0.5 * ((lo + hi) * z0[:k] - lo * hi + z0[:k] ** 2)

    return ConvexSubproblem(
        objective=objective,
        quad_constraints=tuple(quads),
        lin_a=a,
        lin_b=b,
        start=np.concatenate([z0, t0]),
        fixed=tuple(fixed),
    )
