"""Guaranteed propagation of constrained zonotopes through nonlinear maps.

Two enclosure routes are provided: a mean value extension driven by an
interval Jacobian, and a first-order Taylor extension with a rigorously
bounded quadratic remainder. Both reduce conservatism through a choice of
expansion point h inside the propagated set (strategies C1-C4).
"""

from __future__ import annotations

import warnings

import numpy as np

from . import lp
from .intervals import IntervalMatrix, IntervalVector, real_matmul_interval, sandwich
from .sets import ConstrainedZonotope, EliminationTrail, eliminate_constraints


class HSelectionError(RuntimeError):
    """The requested expansion-point strategy produced a non-member point."""


class NonlinearModel:
    """Discrete-time map x+ = f(x, u, w) with hand-coded interval derivatives.

    Subclasses supply point evaluation plus interval enclosures of the
    Jacobians (and, for the Taylor route, half-Hessians over the augmented
    (x, w) argument: H_ii = 0.5 d2f/dz_i^2, H_ij = d2f/dz_i dz_j for i < j,
    zero below the diagonal).
    """

    n: int
    n_w: int
    n_u: int
    affine_in_w: bool = False

    def eval(self, x, u, w) -> np.ndarray:
        raise NotImplementedError

    def jacobian_x(self, x_box: IntervalVector, u, w_box: IntervalVector) -> IntervalMatrix:
        raise NotImplementedError

    def jacobian_w(self, x, u, w_box: IntervalVector) -> IntervalMatrix:
        raise NotImplementedError

    def hessians(self, z_box: IntervalVector, u) -> list:
        raise NotImplementedError

    def beta_x(self, x, u) -> np.ndarray:
        """Drift term of an affine-in-w map f = beta_x(x) + B_w(x) w."""
        raise NotImplementedError

    def input_matrix_w(self, x, u) -> np.ndarray:
        """B_w(x) of an affine-in-w map."""
        raise NotImplementedError

    def jacobian_point(self, x, u, w) -> np.ndarray:
        """Real Jacobian of f over (x, w) at a point, shape n x (n + n_w)."""
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        jx = self.jacobian_x(IntervalVector(x, x), u, IntervalVector(w, w)).mid
        if self.n_w:
            jw = self.jacobian_w(x, u, IntervalVector(w, w)).mid
            return np.hstack([jx, jw])
        return jx


# ---------------------------------------------------------------------------
# CZ-inclusion: enclosure of an interval matrix times a constrained zonotope.
# ---------------------------------------------------------------------------


def cz_inclusion(J: IntervalMatrix, X: ConstrainedZonotope, xbar=None) -> ConstrainedZonotope:
    """Enclosure of {J_hat x : J_hat in J, x in X} with n_gen + rows(J) generators.

    `xbar` optionally supplies a precomputed zonotope (p_bar, M_bar)
    enclosing X (center and generators after eliminating all constraints);
    otherwise it is derived here by iterated constraint elimination.
    """
    n_out, m = J.shape
    if m != X.dim:
        raise ValueError(f"interval matrix has {m} columns, set has dimension {X.dim}")
    if xbar is None:
        Xz, _ = eliminate_constraints(X, X.n_con)
        p_bar, M_bar = Xz.c, Xz.G
    else:
        p_bar, M_bar = xbar
    diam_j = J.diam
    # diam(m_i) for m = (J - mid J) p_bar evaluated with interval arithmetic.
    diam_m = diam_j @ np.abs(p_bar)
    p_diag = 0.5 * diam_m + 0.5 * (diam_j @ np.abs(M_bar)).sum(axis=1)
    mapped = X.linear_map(J.mid)
    return mapped + ConstrainedZonotope.zonotope(np.diag(p_diag), np.zeros(n_out))


# ---------------------------------------------------------------------------
# Expansion-point strategies.
# ---------------------------------------------------------------------------


def select_h_C1(X: ConstrainedZonotope, tol: float = 1e-6) -> np.ndarray:
    """Center of the interval hull, provided it belongs to X."""
    h = X.interval_hull().mid
    if not X.contains(h, tol):
        raise HSelectionError("interval-hull center is not a member; use C2 (or C3/C4)")
    return h


def select_h_C2(
    X: ConstrainedZonotope, J: IntervalMatrix, trail: EliminationTrail | None = None
) -> np.ndarray:
    """Member point minimizing the residual-box size of the CZ-inclusion.

    Solves min ||Theta p_bar(xi)||_1 over the generator variables of X,
    where Theta stacks the column diameters of J and p_bar is the center of
    the zonotope obtained by eliminating all constraints of X - h.
    """
    if trail is None:
        _, trail = eliminate_constraints(X, X.n_con)
    shift = trail.center_shift
    theta = J.diam.sum(axis=0)
    n, n_g = X.dim, X.n_gen
    # Variables: xi (n_g), t (n), slacks s1, s2 (n each); minimize sum t with
    # -t <= Theta (shift - G xi) <= t.
    tg = theta[:, None] * X.G
    eq = np.block(
        [
            [-tg, -np.eye(n), np.eye(n), np.zeros((n, n))],
            [-tg, np.eye(n), np.zeros((n, n)), -np.eye(n)],
            [X.A, np.zeros((X.n_con, 3 * n))],
        ]
    )
    rhs = np.concatenate([-theta * shift, -theta * shift, X.b])
    cost = np.concatenate([np.zeros(n_g), np.ones(n), np.zeros(2 * n)])
    lower = np.concatenate([-np.ones(n_g), np.zeros(3 * n)])
    upper = np.concatenate([np.ones(n_g), np.full(3 * n, np.inf)])
    sol = lp.solve_lp(lp.LpProblem(cost, eq, rhs, lower, upper))
    if not sol.optimal:
        raise lp.LpError("expansion-point LP infeasible: set is empty")
    xi = sol.x[:n_g]
    # Prefer xi = 0 (h = c) when it is feasible and ties the optimum.
    if np.max(np.abs(X.b), initial=0.0) <= 1e-12:
        obj_zero = float(np.sum(np.abs(theta * shift)))
        if obj_zero <= sol.objective + 1e-9:
            xi = np.zeros(n_g)
    return X.c + X.G @ xi


def select_h_C3(X: ConstrainedZonotope) -> np.ndarray:
    """Closest member (1-norm) to the representation center."""
    return X.closest_point(X.c)


def select_h_C4(X: ConstrainedZonotope, tol: float = 1e-6):
    """Representation center if it is a member; otherwise recenter the CG-rep.

    Returns (h, X') where X' equals X as a set and has center field h.
    """
    if X.n_con == 0 or X.contains(X.c, tol):
        return X.c, X
    h_bar = X.interval_hull().mid
    if not X.contains(h_bar, tol):
        h_bar = X.closest_point(X.c)
    try:
        return h_bar, X.rescale_with_center(h_bar)
    except ValueError:
        warnings.warn("recentering failed (center not in range of G); falling back to C3")
        return select_h_C3(X), X


# ---------------------------------------------------------------------------
# Mean value extension.
# ---------------------------------------------------------------------------


def mean_value_extension(
    model: NonlinearModel,
    X: ConstrainedZonotope,
    W: ConstrainedZonotope,
    u,
    strategy: str = "C2",
) -> ConstrainedZonotope:
    """Enclosure of {f(x, u, w) : x in X, w in W} from the mean value theorem."""
    hull_x = X.interval_hull()
    hull_w = W.interval_hull()
    J = model.jacobian_x(hull_x, u, hull_w)
    Xz, trail = eliminate_constraints(X, X.n_con)
    if strategy == "C1":
        h = select_h_C1(X)
    elif strategy == "C2":
        h = select_h_C2(X, J, trail)
    else:
        raise ValueError(f"mean value extension supports C1/C2, got {strategy!r}")
    if model.affine_in_w:
        Z = W.linear_map(model.input_matrix_w(h, u)).translate(model.beta_x(h, u))
    else:
        h_w = W.c if W.is_zonotope else W.closest_point(W.c)
        Jw = model.jacobian_w(h, u, hull_w)
        Z = cz_inclusion(
            Jw, W.translate(-h_w), xbar=(hull_w.mid - h_w, np.diag(hull_w.rad))
        ).translate(model.eval(h, u, h_w))
    # The enclosing zonotope from iterated constraint elimination supplies the
    # (p_bar, M_bar) pair of the inclusion bound; the expansion-point LP (C2)
    # optimizes exactly this criterion.
    incl = cz_inclusion(J, X.translate(-h), xbar=(Xz.c - h, Xz.G))
    return Z + incl


# ---------------------------------------------------------------------------
# First-order Taylor extension.
# ---------------------------------------------------------------------------


def _quadratic_remainder(Z: ConstrainedZonotope, q_tilde: list) -> ConstrainedZonotope:
    """The lifted-variable remainder term built from Q_tilde = G' Q G."""
    n = len(q_tilde)
    m_g = Z.n_gen
    m_c = Z.n_con
    i_idx, j_idx = np.triu_indices(m_g, k=1)  # lexicographic i < j
    c_t = np.empty(n)
    d = np.empty(n)
    G_t = np.empty((n, m_g + i_idx.size))
    for q, Qt in enumerate(q_tilde):
        mid = Qt.mid
        c_t[q] = 0.5 * np.trace(mid)
        d[q] = Qt.rad.sum()
        G_t[q, :m_g] = 0.5 * np.diag(mid)
        G_t[q, m_g:] = mid[i_idx, j_idx] + mid[j_idx, i_idx]
    gens = np.hstack([G_t, np.diag(d)])
    r_idx, s_idx = np.triu_indices(m_c, k=0)  # lexicographic r <= s
    if m_c:
        Ar = Z.A[r_idx]
        As = Z.A[s_idx]
        a_zeta = 0.5 * Ar * As
        a_xi = Ar[:, i_idx] * As[:, j_idx] + Ar[:, j_idx] * As[:, i_idx]
        A_t = np.hstack([a_zeta, a_xi, np.zeros((r_idx.size, n))])
        b_t = Z.b[r_idx] * Z.b[s_idx] - 0.5 * (Ar * As).sum(axis=1)
    else:
        A_t = np.zeros((0, gens.shape[1]))
        b_t = np.zeros(0)
    return ConstrainedZonotope(gens, c_t, A_t, b_t)


def first_order_taylor_extension(
    model: NonlinearModel,
    X: ConstrainedZonotope,
    W: ConstrainedZonotope,
    u,
    strategy: str = "C4",
) -> ConstrainedZonotope:
    """Enclosure of the image from a first-order Taylor expansion over X x W."""
    n, n_w = model.n, model.n_w
    Z = X.cartesian_product(W)
    if strategy == "C4":
        h, Z = select_h_C4(Z)
    elif strategy == "C3":
        h = select_h_C3(Z)
    elif strategy == "C1":
        h = select_h_C1(Z)
    elif strategy == "C2":
        hull_x = X.interval_hull()
        hull_w = W.interval_hull()
        J = model.jacobian_x(hull_x, u, hull_w)
        h_x = select_h_C2(X, J)
        h_w = W.c if W.is_zonotope else W.closest_point(W.c)
        h = np.concatenate([h_x, h_w])
    else:
        raise ValueError(f"unknown expansion-point strategy {strategy!r}")
    hull_z = Z.interval_hull()
    q_mats = model.hessians(hull_z, u)
    q_tilde = [sandwich(Z.G.T, Q, Z.G) for Q in q_mats]
    remainder = _quadratic_remainder(Z, q_tilde)
    p = Z.c - h
    l_rows = [real_matmul_interval(p[None, :], Q) for Q in q_mats]
    L = IntervalMatrix(np.vstack([r.lo for r in l_rows]), np.vstack([r.hi for r in l_rows]))
    Y = ConstrainedZonotope(2.0 * Z.G, p, Z.A, Z.b)
    curv_cross = cz_inclusion(L, Y)
    F = model.jacobian_point(h[:n], u, h[n:])
    f_h = model.eval(h[:n], u, h[n:])
    linear_part = ConstrainedZonotope(F @ Z.G, f_h + F @ p, Z.A, Z.b)
    return linear_part + remainder + curv_cross
