"""LP layer: correctness against brute-force vertex oracles, duals, determinism."""

import itertools

import numpy as np
import pytest

from czest import lp
from czest.lp import LpProblem, LpSolution, duality_gap, lp_membership, membership_residual, solve_lp
from czest.sets import ConstrainedZonotope


def test_known_segment_lp():
    # max 0.2 xi1 + 0.4 xi2 + 0.2 xi3 over 2(xi1+xi2+xi3) = -3, xi in [-1,1]^3
    # has maximum -0.2, so the minimized objective is 0.2.
    p = LpProblem(
        cost=-np.array([0.2, 0.4, 0.2]),
        eq_matrix=np.array([[2.0, 2.0, 2.0]]),
        eq_rhs=np.array([-3.0]),
        lower=-np.ones(3),
        upper=np.ones(3),
    )
    sol = solve_lp(p)
    assert sol.optimal
    assert abs(sol.objective - 0.2) <= 1e-9
    assert np.max(np.abs(sol.x)) <= 1.0 + 1e-9


def brute_force_box_lp(cost, A, b, tol=1e-9):
    """Optimal value of min cost'x over A x = b, x in [-1,1]^n by vertex search.

    Enumerates sign patterns on n - rank(A) free coordinates; only valid for
    tiny problems, which is the point of an independent oracle.
    """
    n = cost.shape[0]
    best = np.inf
    # Enumerate vertices of the feasible polytope: fix subsets to +-1 and
    # solve the equalities for the rest.
    m = A.shape[0]
    for free in itertools.combinations(range(n), m):
        fixed = [i for i in range(n) if i not in free]
        for signs in itertools.product((-1.0, 1.0), repeat=len(fixed)):
            x = np.zeros(n)
            x[fixed] = signs
            Af = A[:, list(free)]
            if np.linalg.matrix_rank(Af) < m:
                continue
            rhs = b - A[:, fixed] @ x[fixed]
            xf, *_ = np.linalg.lstsq(Af, rhs, rcond=None)
            if np.linalg.norm(Af @ xf - rhs) > tol:
                continue
            x[list(free)] = xf
            if np.max(np.abs(x)) <= 1.0 + tol:
                best = min(best, float(cost @ x))
    return best


def test_random_lps_match_vertex_oracle():
    rng = np.random.default_rng(5)
    solved = 0
    for _ in range(60):
        n = rng.integers(2, 5)
        m = rng.integers(1, n)
        cost = rng.normal(size=n)
        A = rng.normal(size=(m, n))
        xi0 = rng.uniform(-0.8, 0.8, n)  # guarantees feasibility
        b = A @ xi0
        p = LpProblem(cost, A, b, -np.ones(n), np.ones(n))
        sol = solve_lp(p)
        assert sol.optimal
        ref = brute_force_box_lp(cost, A, b)
        assert np.isfinite(ref)
        assert abs(sol.objective - ref) <= 1e-7 * (1.0 + abs(ref))
        solved += 1
    assert solved == 60


def test_infeasible_and_unbounded_detection():
    p = LpProblem(np.zeros(2), np.array([[1.0, 1.0]]), np.array([5.0]),
                  -np.ones(2), np.ones(2))
    assert solve_lp(p).status == "infeasible"
    q = LpProblem(np.array([1.0]), np.zeros((0, 1)), np.zeros(0),
                  np.array([-np.inf]), np.array([np.inf]))
    assert solve_lp(q).status == "unbounded"


def test_duality_gap_small():
    rng = np.random.default_rng(6)
    for _ in range(30):
        n = rng.integers(2, 6)
        m = rng.integers(1, n)
        cost = rng.normal(size=n)
        A = rng.normal(size=(m, n))
        b = A @ rng.uniform(-0.5, 0.5, n)
        sol = solve_lp(LpProblem(cost, A, b, -np.ones(n), np.ones(n)))
        assert sol.optimal
        assert duality_gap(LpProblem(cost, A, b, -np.ones(n), np.ones(n)), sol) <= 1e-6


def test_determinism():
    rng = np.random.default_rng(7)
    n = 6
    cost = rng.normal(size=n)
    A = rng.normal(size=(2, n))
    b = A @ rng.uniform(-0.5, 0.5, n)
    p = LpProblem(cost, A, b, -np.ones(n), np.ones(n))
    sols = [solve_lp(p) for _ in range(3)]
    for s in sols[1:]:
        assert np.array_equal(s.x, sols[0].x)
        assert s.objective == sols[0].objective


def test_problem_validation():
    with pytest.raises(ValueError):
        LpProblem(np.ones(2), np.zeros((1, 2)), np.zeros(2), -np.ones(2), np.ones(2))
    with pytest.raises(ValueError):
        LpProblem(np.ones(2), np.zeros((0, 2)), np.zeros(0), np.ones(2), -np.ones(2))


def test_membership_residual_and_lp_membership():
    Z = ConstrainedZonotope.zonotope(np.eye(2), np.zeros(2))
    assert lp_membership([0.5, -0.5], Z)
    assert not lp_membership([1.5, 0.0], Z)
    # Residual equals the 1-norm distance outside an axis-aligned box.
    assert abs(membership_residual([1.5, 0.0], Z) - 0.5) <= 1e-7
    # Constrained case: the segment xi1 + xi2 = 1 inside the unit box.
    Zc = ConstrainedZonotope(np.eye(2), np.zeros(2),
                             np.array([[1.0, 1.0]]), np.array([1.0]))
    assert lp_membership([0.5, 0.5], Zc)
    assert lp_membership([1.0, 0.0], Zc)
    assert not lp_membership([0.0, 0.0], Zc)


def test_unbounded_objective_value():
    q = LpProblem(np.array([1.0]), np.zeros((0, 1)), np.zeros(0),
                  np.array([-np.inf]), np.array([np.inf]))
    sol = solve_lp(q)
    assert sol.objective == -np.inf and not sol.optimal
