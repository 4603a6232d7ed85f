"""Dense linear programming in standard equality-plus-box form.

The solver backend is scipy's HiGHS, which is deterministic for identical
inputs and comfortably meets the simplex-grade accuracy this library needs.
Everything downstream (interval hulls, membership tests, closest points,
rescaling, expansion-point selection) is phrased in this one problem shape:

    min c'x   s.t.   A_eq x = b_eq,   lower <= x <= upper.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

FEAS_TOL = 1e-8
OPT_TOL = 1e-8


class LpError(RuntimeError):
    """Solver failed to reach a conclusive status."""


@dataclass(frozen=True)
class LpProblem:
    cost: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        cost = np.atleast_1d(np.asarray(self.cost, dtype=float))
        n = cost.shape[0]
        eq = np.asarray(self.eq_matrix, dtype=float).reshape(-1, n)
        rhs = np.atleast_1d(np.asarray(self.eq_rhs, dtype=float))
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if eq.shape[0] != rhs.shape[0]:
            raise ValueError("equality rows and rhs length differ")
        both = np.isfinite(lower) & np.isfinite(upper)
        if np.any(lower[both] > upper[both]):
            raise ValueError("lower bound exceeds upper bound")
        for name, val in (("cost", cost), ("eq_matrix", eq), ("eq_rhs", rhs),
                          ("lower", lower), ("upper", upper)):
            object.__setattr__(self, name, val)


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float
    eq_duals: np.ndarray | None = None
    lower_duals: np.ndarray | None = None
    upper_duals: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def solve_lp(p: LpProblem) -> LpSolution:
    bounds = list(zip(p.lower, p.upper))
    a_eq = p.eq_matrix if p.eq_matrix.shape[0] else None
    b_eq = p.eq_rhs if p.eq_matrix.shape[0] else None
    row_scale = None
    if a_eq is not None:
        # Equilibrate equality rows; badly scaled rows (arising e.g. from
        # products of constraint data) otherwise make HiGHS reject the model.
        row_scale = 1.0 / np.maximum(np.abs(a_eq).max(axis=1), 1.0)
        a_eq = a_eq * row_scale[:, None]
        b_eq = b_eq * row_scale
    res = linprog(p.cost, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status not in (0, 2, 3):
        # Rarely the default solver gives up on badly conditioned models; the
        # dual simplex is slower but more robust, so retry before failing.
        res = linprog(p.cost, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs-ds")
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        if a_eq is not None:
            resid = float(np.max(np.abs(a_eq @ x - b_eq), initial=0.0))
            scale = 1.0 + float(np.max(np.abs(b_eq), initial=0.0))
            if resid > 1e-6 * scale:
                raise LpError(f"reported optimum violates equalities by {resid}")
        eq_duals = None
        if res.eqlin is not None and row_scale is not None:
            # Duals of the scaled rows map back by the same row factors.
            eq_duals = np.asarray(res.eqlin.marginals, dtype=float) * row_scale
        return LpSolution(
            status="optimal",
            x=x,
            objective=float(res.fun),
            eq_duals=eq_duals,
            lower_duals=np.asarray(res.lower.marginals, dtype=float),
            upper_duals=np.asarray(res.upper.marginals, dtype=float),
        )
    if res.status == 2:
        return LpSolution(status="infeasible", x=None, objective=float("nan"))
    if res.status == 3:
        return LpSolution(status="unbounded", x=None, objective=-float("inf"))
    raise LpError(f"solver stalled: {res.message}")


def duality_gap(p: LpProblem, sol: LpSolution) -> float:
    """Primal-dual objective gap at a reported optimum (for verification)."""
    if not sol.optimal:
        raise ValueError("duality gap requires an optimal solution")
    dual = 0.0
    if p.eq_matrix.shape[0]:
        dual += float(p.eq_rhs @ sol.eq_duals)
    lo_term = np.where(np.isfinite(p.lower), p.lower, 0.0) * sol.lower_duals
    up_term = np.where(np.isfinite(p.upper), p.upper, 0.0) * sol.upper_duals
    dual += float(np.sum(lo_term) + np.sum(up_term))
    return abs(sol.objective - dual)


def membership_residual(point, zset) -> float:
    """1-norm infeasibility of point = c + G xi, A xi = b over ||xi||_inf <= 1.

    Zero (up to LP tolerance) iff the point belongs to the constrained
    zonotope `zset` (any object with G, c, A, b arrays).
    """
    point = np.asarray(point, dtype=float)
    G, c, A, b = zset.G, zset.c, zset.A, zset.b
    n, n_g = G.shape
    n_c = A.shape[0]
    rows = n + n_c
    # Variables: xi (n_g), then split residuals e+ and e- (rows each).
    stacked = np.vstack([G, A]) if n_c else G
    rhs = np.concatenate([point - c, b])
    eye = np.eye(rows)
    eq = np.hstack([stacked, eye, -eye])
    cost = np.concatenate([np.zeros(n_g), np.ones(2 * rows)])
    lower = np.concatenate([-np.ones(n_g), np.zeros(2 * rows)])
    upper = np.concatenate([np.ones(n_g), np.full(2 * rows, np.inf)])
    sol = solve_lp(LpProblem(cost, eq, rhs, lower, upper))
    if not sol.optimal:
        raise LpError("membership LP did not solve")
    return max(sol.objective, 0.0)


def lp_membership(point, zset, tol: float = 1e-6) -> bool:
    return membership_residual(point, zset) <= tol
