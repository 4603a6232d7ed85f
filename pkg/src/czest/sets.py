"""Constrained zonotope set algebra in CG-rep {G, c, A, b}.

A constrained zonotope is {c + G xi : ||xi||_inf <= 1, A xi = b}. With zero
constraint rows this degenerates to a plain zonotope; every operation here
accepts that case. Linear map, Minkowski sum, generalized intersection, and
Cartesian product are exact; constraint elimination and generator reduction
are enclosing over-approximations used to cap representation size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .intervals import IntervalVector


class EmptySetError(ValueError):
    """Operation requires a non-empty set."""


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class ConstrainedZonotope:
    G: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = c.shape[0]
        if G.size == 0:
            G = G.reshape(n, 0)
        if G.shape[0] != n:
            raise DimensionError(f"G has {G.shape[0]} rows, center has {n}")
        n_g = G.shape[1]
        A = np.asarray(self.A, dtype=float).reshape(-1, n_g) if np.size(self.A) else np.zeros((0, n_g))
        b = np.atleast_1d(np.asarray(self.b, dtype=float)) if np.size(self.b) else np.zeros(0)
        if A.shape[0] != b.shape[0]:
            raise DimensionError("constraint rows and rhs length differ")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    # -- basic descriptors ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    @property
    def n_gen(self) -> int:
        return self.G.shape[1]

    @property
    def n_con(self) -> int:
        return self.A.shape[0]

    @property
    def is_zonotope(self) -> bool:
        return self.n_con == 0

    @classmethod
    def zonotope(cls, G, c) -> "ConstrainedZonotope":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        G = np.asarray(G, dtype=float).reshape(c.shape[0], -1)
        return cls(G, c, np.zeros((0, G.shape[1])), np.zeros(0))

    @classmethod
    def from_box(cls, lo, hi) -> "ConstrainedZonotope":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        return cls.zonotope(np.diag(0.5 * (hi - lo)), 0.5 * (hi + lo))

    @classmethod
    def singleton(cls, c) -> "ConstrainedZonotope":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return cls.zonotope(np.zeros((c.shape[0], 0)), c)

    # -- exact CG-rep operations ----------------------------------------------

    def linear_map(self, R) -> "ConstrainedZonotope":
        R = np.atleast_2d(np.asarray(R, dtype=float))
        if R.shape[1] != self.dim:
            raise DimensionError(f"map has {R.shape[1]} columns, set has dimension {self.dim}")
        return ConstrainedZonotope(R @ self.G, R @ self.c, self.A, self.b)

    def translate(self, p) -> "ConstrainedZonotope":
        return ConstrainedZonotope(self.G, self.c + np.asarray(p, dtype=float), self.A, self.b)

    def minkowski_sum(self, other: "ConstrainedZonotope") -> "ConstrainedZonotope":
        if other.dim != self.dim:
            raise DimensionError("Minkowski sum of sets with different dimensions")
        G = np.hstack([self.G, other.G])
        A = _blkdiag(self.A, other.A, self.n_gen, other.n_gen)
        return ConstrainedZonotope(G, self.c + other.c, A, np.concatenate([self.b, other.b]))

    def __add__(self, other):
        return self.minkowski_sum(other)

    def generalized_intersect(self, R, Y: "ConstrainedZonotope") -> "ConstrainedZonotope":
        """Exact {z in self : R z in Y}."""
        R = np.atleast_2d(np.asarray(R, dtype=float))
        if R.shape[1] != self.dim or R.shape[0] != Y.dim:
            raise DimensionError("intersection map shape mismatch")
        n_g, n_gy = self.n_gen, Y.n_gen
        G = np.hstack([self.G, np.zeros((self.dim, n_gy))])
        A = np.vstack(
            [
                np.hstack([self.A, np.zeros((self.n_con, n_gy))]),
                np.hstack([np.zeros((Y.n_con, n_g)), Y.A]),
                np.hstack([R @ self.G, -Y.G]),
            ]
        )
        b = np.concatenate([self.b, Y.b, Y.c - R @ self.c])
        return ConstrainedZonotope(G, self.c, A, b)

    def cartesian_product(self, other: "ConstrainedZonotope") -> "ConstrainedZonotope":
        G = _blkdiag(self.G, other.G, self.n_gen, other.n_gen)
        A = _blkdiag(self.A, other.A, self.n_gen, other.n_gen)
        return ConstrainedZonotope(
            G, np.concatenate([self.c, other.c]), A, np.concatenate([self.b, other.b])
        )

    # -- LP-backed queries ------------------------------------------------------

    def contains(self, point, tol: float = 1e-6) -> bool:
        return lp.lp_membership(point, self, tol)

    def is_empty(self, tol: float = lp.FEAS_TOL) -> bool:
        if self.n_con == 0:
            return False
        sol = lp.solve_lp(
            lp.LpProblem(np.zeros(self.n_gen), self.A, self.b, -np.ones(self.n_gen), np.ones(self.n_gen))
        )
        return not sol.optimal

    def interval_hull(self) -> IntervalVector:
        """Tight axis-aligned bounding box (2n LPs; closed form for zonotopes)."""
        if self.n_con == 0:
            r = np.abs(self.G).sum(axis=1)
            return IntervalVector(self.c - r, self.c + r)
        lo = np.empty(self.dim)
        hi = np.empty(self.dim)
        ones = np.ones(self.n_gen)
        for j in range(self.dim):
            row = self.G[j]
            smin = lp.solve_lp(lp.LpProblem(row, self.A, self.b, -ones, ones))
            smax = lp.solve_lp(lp.LpProblem(-row, self.A, self.b, -ones, ones))
            if not (smin.optimal and smax.optimal):
                raise EmptySetError("interval hull of an empty constrained zonotope")
            lo[j] = self.c[j] + smin.objective
            hi[j] = self.c[j] - smax.objective
        return IntervalVector(np.minimum(lo, hi), np.maximum(lo, hi))

    def radius_metric(self) -> float:
        """Half the length of the longest edge of the interval hull."""
        return float(self.interval_hull().rad.max())

    def closest_point(self, h) -> np.ndarray:
        """Point of the set minimizing the 1-norm distance to h (single LP)."""
        h = np.asarray(h, dtype=float)
        n, n_g = self.dim, self.n_gen
        # Variables: xi (n_g), t (n), slacks s1, s2 (n each):
        #   c - h + G xi + t ... encoded as  G xi - t + s1 = h - c,  G xi + t - s2 = h - c.
        eq = np.block(
            [
                [self.G, -np.eye(n), np.eye(n), np.zeros((n, n))],
                [self.G, np.eye(n), np.zeros((n, n)), -np.eye(n)],
                [self.A, np.zeros((self.n_con, 3 * n))],
            ]
        )
        rhs = np.concatenate([h - self.c, h - self.c, self.b])
        cost = np.concatenate([np.zeros(n_g), np.ones(n), np.zeros(2 * n)])
        lower = np.concatenate([-np.ones(n_g), np.zeros(3 * n)])
        upper = np.concatenate([np.ones(n_g), np.full(3 * n, np.inf)])
        sol = lp.solve_lp(lp.LpProblem(cost, eq, rhs, lower, upper))
        if not sol.optimal:
            raise EmptySetError("closest point query on an empty constrained zonotope")
        return self.c + self.G @ sol.x[:n_g]

    def rescale_with_center(self, h, residual_tol: float = 1e-8) -> "ConstrainedZonotope":
        """Equivalent CG-rep of the same set whose center field equals h.

        h must lie in the range of G. Generator count doubles (plus a zero
        block); constraints gain the consistency rows tying old and new
        generator variables together.
        """
        h = np.asarray(h, dtype=float)
        xi_ls, *_ = np.linalg.lstsq(self.G, h - self.c, rcond=None)
        if np.linalg.norm(self.G @ xi_ls - (h - self.c)) > residual_tol * (1.0 + np.linalg.norm(h)):
            raise ValueError("desired center is not in the range of the generator matrix")
        n_g = self.n_gen
        box_lo, box_hi, empty = tighten_generator_bounds(self.A, self.b)
        if empty:
            raise EmptySetError("rescaling an empty constrained zonotope")
        # min 0.5 ||xiU - xiL||_1 s.t. c + 0.5 G (xiL + xiU) = h, xiL <= box_lo, xiU >= box_hi.
        # xiU - xiL >= box_hi - box_lo >= 0, so the objective is linear.
        cost = np.concatenate([-0.5 * np.ones(n_g), 0.5 * np.ones(n_g)])
        eq = np.hstack([0.5 * self.G, 0.5 * self.G])
        rhs = h - self.c
        lower = np.concatenate([np.full(n_g, -np.inf), box_hi])
        upper = np.concatenate([box_lo, np.full(n_g, np.inf)])
        sol = lp.solve_lp(lp.LpProblem(cost, eq, rhs, lower, upper))
        if not sol.optimal:
            raise lp.LpError("rescaling LP failed (should always be feasible)")
        xi_l = sol.x[:n_g]
        xi_u = sol.x[n_g:]
        xi_m = 0.5 * (xi_l + xi_u)
        e_r = 0.5 * (xi_u - xi_l)
        GE = self.G * e_r[None, :]
        AE = self.A * e_r[None, :]
        G = np.hstack([GE, np.zeros((self.dim, n_g))])
        A = np.block(
            [
                [AE, np.zeros((self.n_con, n_g))],
                [np.zeros((self.n_con, n_g)), self.A],
                [GE, -self.G],
            ]
        )
        b = np.concatenate([self.b - self.A @ xi_m, self.b, self.c - h])
        return ConstrainedZonotope(G, h, A, b)

    # -- sampling ----------------------------------------------------------------

    def sample(self, count: int, seed: int = 0) -> np.ndarray:
        """Deterministic-for-seed member points, shape (count, dim).

        Generator variables are drawn uniformly in the tightened box, then
        projected onto the affine constraint set; draws leaving the unit box
        are retried, with a closest-point LP as the final fallback.
        """
        rng = np.random.default_rng(seed)
        n_g = self.n_gen
        if n_g == 0:
            return np.tile(self.c, (count, 1))
        box_lo, box_hi, empty = tighten_generator_bounds(self.A, self.b)
        if empty:
            raise EmptySetError("sampling an empty constrained zonotope")
        if self.n_con == 0:
            xi = rng.uniform(box_lo, box_hi, size=(count, n_g))
            return self.c + xi @ self.G.T
        pinv_At = np.linalg.pinv(self.A)
        out = np.empty((count, self.dim))
        filled = 0
        attempts = 0
        max_attempts = 200
        while filled < count and attempts < max_attempts:
            want = count - filled
            xi = rng.uniform(box_lo, box_hi, size=(want, n_g))
            # Orthogonal projection onto {A xi = b}.
            xi = xi - (xi @ self.A.T - self.b) @ pinv_At.T
            ok = np.max(np.abs(xi), axis=1) <= 1.0 + 1e-12
            n_ok = int(ok.sum())
            if n_ok:
                out[filled : filled + n_ok] = self.c + xi[ok] @ self.G.T
                filled += n_ok
            attempts += 1
        while filled < count:
            xi = rng.uniform(box_lo, box_hi)
            out[filled] = self.closest_point(self.c + self.G @ xi)
            filled += 1
        return out

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "G": self.G.tolist(),
            "c": self.c.tolist(),
            "A": self.A.tolist() if self.n_con else [],
            "b": self.b.tolist() if self.n_con else [],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "ConstrainedZonotope":
        c = np.asarray(d["c"], dtype=float)
        G = np.asarray(d["G"], dtype=float).reshape(c.shape[0], -1)
        A = d.get("A") or []
        b = d.get("b") or []
        if len(b) == 0:
            return cls.zonotope(G, c)
        return cls(G, c, np.asarray(A, dtype=float), np.asarray(b, dtype=float))

    @classmethod
    def from_json(cls, s: str) -> "ConstrainedZonotope":
        return cls.from_json_dict(json.loads(s))


def _blkdiag(top, bottom, top_cols, bottom_cols):
    return np.block(
        [
            [top, np.zeros((top.shape[0], bottom_cols))],
            [np.zeros((bottom.shape[0], top_cols)), bottom],
        ]
    )


def rescale_to_box(Z: "ConstrainedZonotope") -> "ConstrainedZonotope":
    """Rescale the generator variables to their tightened feasibility box.

    Exact (the set is unchanged): the box contains every feasible generator
    vector, so re-parameterizing over it loses nothing while shrinking the
    columns that the constraints pin down. Raises EmptySetError when the
    constraints are provably unsatisfiable.
    """
    if Z.n_con == 0:
        return Z
    box_lo, box_hi, empty = tighten_generator_bounds(Z.A, Z.b)
    if empty:
        raise EmptySetError("rescaling an empty constrained zonotope")
    xi_m = 0.5 * (box_lo + box_hi)
    xi_r = 0.5 * (box_hi - box_lo)
    return ConstrainedZonotope(
        Z.G * xi_r[None, :], Z.c + Z.G @ xi_m, Z.A * xi_r[None, :], Z.b - Z.A @ xi_m
    )


def normalize_constraint_rows(Z: "ConstrainedZonotope") -> "ConstrainedZonotope":
    """Scale each constraint row of [A | b] to unit max magnitude.

    Exact (the constraint set is unchanged); keeps downstream products of
    constraint data, such as the lifted quadratic constraints, well scaled.
    """
    if Z.n_con == 0:
        return Z
    scale = np.maximum(np.abs(Z.A).max(axis=1), np.abs(Z.b))
    scale = np.where(scale > 0.0, scale, 1.0)
    return ConstrainedZonotope(Z.G, Z.c, Z.A / scale[:, None], Z.b / scale)


# ---------------------------------------------------------------------------
# Generator-variable box tightening by interval constraint propagation.
# ---------------------------------------------------------------------------


def tighten_generator_bounds(A, b, max_sweeps: int = 100, tol: float = 1e-12,
                             want_implied: bool = False):
    """Box enclosing B_inf(A, b) inside [-1, 1]^n_g.

    Each sweep solves every constraint row for each variable with a nonzero
    coefficient using interval division and intersects with the current
    bounds. Returns (lo, hi, empty_flag); the flag reports detected
    emptiness instead of raising.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n_c, n_g = A.shape if A.ndim == 2 else (0, 0)
    lo = -np.ones(n_g)
    hi = np.ones(n_g)
    implied = None

    def out(empty):
        return (lo, hi, empty, implied) if want_implied else (lo, hi, empty)

    if n_c == 0:
        return out(False)
    abs_a = np.abs(A)
    if np.any(abs_a.sum(axis=1) < np.abs(b) - 1e-9):
        return out(True)  # some row is unsatisfiable even over [-1, 1]^n_g
    scale = np.maximum(abs_a.max(axis=1), 1.0)
    # Skip pivots too small to tighten anything without overflow.
    usable = abs_a > 1e-13 * scale[:, None]
    if not usable.any():
        return out(False)
    pos = A > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(max_sweeps):
            # Interval of sum_j A_rj xi_j, then of the sum excluding each pivot.
            term_lo = np.where(pos, A * lo, A * hi)
            term_hi = np.where(pos, A * hi, A * lo)
            rest_lo = term_lo.sum(axis=1)[:, None] - term_lo
            rest_hi = term_hi.sum(axis=1)[:, None] - term_hi
            # xi_i in (b_r - rest) / A_ri, outward-padded against roundoff.
            num_lo = b[:, None] - rest_hi
            num_hi = b[:, None] - rest_lo
            cand_lo = np.where(usable, np.where(pos, num_lo, num_hi) / A, 0.0)
            cand_hi = np.where(usable, np.where(pos, num_hi, num_lo) / A, 0.0)
            pad = 1e-14 + 4.0 * np.spacing(np.maximum(np.abs(cand_lo), np.abs(cand_hi)))
            cand_lo = np.where(usable, cand_lo - pad, -np.inf)
            cand_hi = np.where(usable, cand_hi + pad, np.inf)
            implied = (cand_lo, cand_hi)
            new_lo = np.maximum(lo, cand_lo.max(axis=0))
            new_hi = np.minimum(hi, cand_hi.min(axis=0))
            if np.any(new_lo > new_hi + 1e-12):
                return out(True)
            new_hi = np.maximum(new_hi, new_lo)
            done = np.all(new_lo <= lo + tol) and np.all(new_hi >= hi - tol)
            lo, hi = new_lo, new_hi
            if done:
                break
    return out(False)


# ---------------------------------------------------------------------------
# Constraint elimination with a replayable trail.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrailLevel:
    """One elimination level: center-independent pieces of the recursion."""

    G_bar: np.ndarray  # generators entering the rescaling step
    xi_m: np.ndarray  # rescaling midpoint shift
    Lambda_G: np.ndarray  # elimination gain applied to the constraint rhs
    b_tilde: np.ndarray  # rescaled constraint rhs


@dataclass(frozen=True)
class EliminationTrail:
    levels: tuple
    G0: np.ndarray  # generators after the last processed level
    empty_detected: bool = False

    @property
    def center_shift(self) -> np.ndarray:
        """Accumulated center displacement: sum of G_bar xi_m + Lambda_G b_tilde."""
        n = self.G0.shape[0]
        shift = np.zeros(n)
        for lev in self.levels:
            shift += lev.G_bar @ lev.xi_m + lev.Lambda_G @ lev.b_tilde
        return shift


def _select_pivot(G, A, b, box_lo, box_hi, pivot_tol, implied=None):
    """Least-error pivot (r, j) for one constraint elimination.

    Eliminating variable j through row r replaces the bound |xi_j| <= 1 by the
    range implied by the row, so the over-approximation is zero when that range
    already fits in [-1, 1] and otherwise grows with the overhang times the
    influence of the column. `implied` optionally carries the per-entry ranges
    already computed by tighten_generator_bounds. Returns (-1, -1) when no
    usable pivot exists.
    """
    n_c, n_g = A.shape
    abs_a = np.abs(A)
    scale = abs_a.max(initial=0.0)
    if scale <= pivot_tol:
        return -1, -1
    usable = abs_a > max(pivot_tol, 1e-8 * scale)
    if not usable.any():
        return -1, -1
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if implied is None:
            term_lo = np.where(A > 0, A * box_lo[None, :], A * box_hi[None, :])
            term_hi = np.where(A > 0, A * box_hi[None, :], A * box_lo[None, :])
            rest_lo = term_lo.sum(axis=1, keepdims=True) - term_lo
            rest_hi = term_hi.sum(axis=1, keepdims=True) - term_hi
            q1 = (b[:, None] - rest_lo) / A
            q2 = (b[:, None] - rest_hi) / A
            imp_lo = np.minimum(q1, q2)
            imp_hi = np.maximum(q1, q2)
        else:
            imp_lo, imp_hi = implied
        overhang = np.maximum(imp_hi - 1.0, 0.0) + np.maximum(-1.0 - imp_lo, 0.0)
        col_norm = np.linalg.norm(np.vstack([G, A]), axis=0)
        score = np.where(usable, overhang * col_norm[None, :], np.inf)
    score = np.where(np.isnan(score), np.inf, score)
    r, j = np.unravel_index(np.argmin(score), score.shape)
    return int(r), int(j)


# Interval-propagation sweeps used to tighten the generator box per
# elimination level.
ELIM_SWEEPS = 12


def eliminate_constraints(Z: ConstrainedZonotope, k_c: int, pivot_tol: float = 1e-10):
    """Over-approximate Z by removing k_c constraints (and one generator each).

    Per level: one Gauss-Jordan preconditioning step at the largest-magnitude
    pivot (ties broken by lowest row then column), rescaling of the generator
    variables to the tightened box, then substitution of the pivot variable.
    Returns the reduced set and the trail needed to replay the center
    recursion for any translated copy of Z.
    """
    if k_c > Z.n_con:
        raise ValueError(f"cannot eliminate {k_c} of {Z.n_con} constraints")
    G = Z.G.copy()
    c = Z.c.copy()
    A = Z.A.copy()
    b = Z.b.copy()
    levels = []
    for _ in range(k_c):
        n_c, n_g = A.shape
        box_lo, box_hi, empty, implied = tighten_generator_bounds(
            A, b, max_sweeps=ELIM_SWEEPS, want_implied=True
        )
        if empty:
            return ConstrainedZonotope(G, c, A, b), EliminationTrail(tuple(levels), G, True)
        r, j = _select_pivot(G, A, b, box_lo, box_hi, pivot_tol, implied=implied)
        if r < 0:
            # Constraints are (numerically) all-zero; drop them outright.
            if np.any(np.abs(b) > 1e-9):
                return ConstrainedZonotope(G, c, A, b), EliminationTrail(tuple(levels), G, True)
            A = np.zeros((0, n_g))
            b = np.zeros(0)
            break
        # Precondition: normalize at the pivot, clear its column elsewhere.
        b[r] /= A[r, j]
        A[r] /= A[r, j]
        mult = A[:, j].copy()
        mult[r] = 0.0
        A -= np.outer(mult, A[r])
        b -= mult * b[r]
        # Rescale generator variables to the tightened feasible box (the box is
        # representation independent up to propagation slack, so the pre-pivot
        # tightening stays valid here).
        xi_m = 0.5 * (box_lo + box_hi)
        xi_r = 0.5 * (box_hi - box_lo)
        G_bar = G.copy()
        c = c + G @ xi_m
        G = G * xi_r[None, :]
        b_t = b - A @ xi_m
        A = A * xi_r[None, :]
        # Eliminate: substitute the pivot variable out of every row. If the
        # rescaling fixed the chosen variable, fall back to the largest entry.
        if abs(A[r, j]) <= pivot_tol:
            piv = np.unravel_index(np.argmax(np.abs(A)), A.shape)
            r, j = int(piv[0]), int(piv[1])
        a = A[r, j]
        if abs(a) <= pivot_tol:
            # Rescaling fixed every constrained variable; constraints are inert.
            levels.append(
                TrailLevel(G_bar, xi_m, np.zeros((G.shape[0], n_c)), b_t)
            )
            A = np.zeros((0, G.shape[1]))
            b = np.zeros(0)
            break
        lam_g = np.zeros((G.shape[0], n_c))
        lam_g[:, r] = G[:, j] / a
        c = c + lam_g @ b_t
        G = G - np.outer(G[:, j] / a, A[r])
        levels.append(TrailLevel(G_bar, xi_m, lam_g, b_t))
        keep_rows = np.arange(n_c) != r
        keep_cols = np.arange(n_g) != j
        b = (b_t - (A[:, j] / a) * b_t[r])[keep_rows]
        A = (A - np.outer(A[:, j] / a, A[r]))[np.ix_(keep_rows, keep_cols)]
        G = G[:, keep_cols]
    return ConstrainedZonotope(G, c, A, b), EliminationTrail(tuple(levels), G)


# Relative weight of constraint rows in the lifted reduction's boxing rule:
# each constraint row is scored as if its radius were this fraction of the
# median generator-row radius (None keeps the rows at their incoming scale).
# Scoring only - the materialized matrices are untouched.
CONSTRAINT_ROW_WEIGHT = 0.01


def reduce_generators(Z: ConstrainedZonotope, target: int) -> ConstrainedZonotope:
    """Enclose Z with at most `target` generators.

    Works in the lifted (dim + n_con)-dimensional zonotope [G; A] with center
    [c; -b]: the smallest-norm generators are boxed into an axis-aligned
    block, then the pieces are read back. With no constraints this is plain
    zonotope generator reduction.
    """
    d = Z.dim + Z.n_con
    if target < d:
        raise ValueError(f"generator target {target} below lifted dimension {d}")
    if Z.n_gen <= target:
        return Z
    if Z.n_con:
        # Rescale the generator variables to their tightened box first: the
        # set is unchanged while the columns about to be boxed shrink.
        try:
            Z = rescale_to_box(Z)
        except EmptySetError:
            pass
    lifted = np.vstack([Z.G, Z.A]) if Z.n_con else Z.G
    # Box the generators closest to being axis-aligned: small ||g||_1 - ||g||_inf
    # means boxing loses little, which is the classic zonotope reduction rule.
    # Constraint rows are rescaled in the score (which columns are boxed is a
    # free choice; any selection yields an enclosure) so that constraint
    # fidelity does not dominate state-space fidelity.
    scored = lifted
    if Z.n_con and CONSTRAINT_ROW_WEIGHT is not None:
        g_rad = np.abs(Z.G).sum(axis=1)
        ref = float(np.median(g_rad[g_rad > 0])) if np.any(g_rad > 0) else 1.0
        a_rad = np.abs(Z.A).sum(axis=1)
        f = CONSTRAINT_ROW_WEIGHT * ref / np.where(a_rad > 0.0, a_rad, 1.0)
        scored = np.vstack([Z.G, Z.A * f[:, None]])
    score = np.abs(scored).sum(axis=0) - np.abs(scored).max(axis=0)
    order = np.argsort(score, kind="stable")  # ascending; stable for determinism
    n_box = Z.n_gen - (target - d)
    boxed = order[:n_box]
    kept = np.sort(order[n_box:])
    diag = np.diag(np.abs(lifted[:, boxed]).sum(axis=1))
    new_lifted = np.hstack([lifted[:, kept], diag])
    G = new_lifted[: Z.dim]
    A = new_lifted[Z.dim :]
    return ConstrainedZonotope(G, Z.c, A, Z.b)
