"""Constrained zonotope algebra: exactness oracles and enclosure checks."""

import numpy as np
import pytest

from conftest import feasible_xi, random_cz
from czest.sets import (
    ConstrainedZonotope,
    DimensionError,
    EmptySetError,
    eliminate_constraints,
    normalize_constraint_rows,
    reduce_generators,
    rescale_to_box,
    tighten_generator_bounds,
)

# The constrained planar set used across the scenario tests: interval hull
# [-1.5, -1.2] x [0.7, 1.3].
X0 = ConstrainedZonotope(
    G=np.array([[0.2, 0.4, 0.2], [0.2, 0.0, -0.2]]),
    c=np.array([-1.0, 1.0]),
    A=np.array([[2.0, 2.0, 2.0]]),
    b=np.array([-3.0]),
)


def test_constructor_shapes_and_errors():
    Z = ConstrainedZonotope.zonotope(np.eye(2), [1.0, 2.0])
    assert Z.dim == 2 and Z.n_gen == 2 and Z.n_con == 0 and Z.is_zonotope
    s = ConstrainedZonotope.singleton([3.0])
    assert s.n_gen == 0 and s.contains([3.0]) and not s.contains([3.1])
    box = ConstrainedZonotope.from_box([-1.0, 0.0], [1.0, 2.0])
    assert np.allclose(box.c, [0.0, 1.0])
    with pytest.raises(DimensionError):
        ConstrainedZonotope(np.eye(3), np.zeros(2), [], [])
    with pytest.raises(DimensionError):
        ConstrainedZonotope(np.eye(2), np.zeros(2), np.ones((1, 2)), np.ones(2))


def test_linear_map_exact():
    rng = np.random.default_rng(10)
    for _ in range(30):
        Z = random_cz(rng, 2, 4, 1)
        R = rng.normal(size=(2, 2))
        RZ = Z.linear_map(R)
        assert RZ.n_gen == Z.n_gen and RZ.n_con == Z.n_con
        for xi in feasible_xi(Z, rng, 10):
            x = Z.c + Z.G @ xi
            assert RZ.contains(R @ x, 1e-6)
            # Shared xi: the image point is realized by the same generator vector.
            assert np.allclose(RZ.c + RZ.G @ xi, R @ x)
    with pytest.raises(DimensionError):
        X0.linear_map(np.eye(3))


def test_minkowski_sum_exact():
    rng = np.random.default_rng(11)
    Z = random_cz(rng, 2, 4, 1)
    W = random_cz(rng, 2, 3, 0)
    S = Z + W
    assert S.n_gen == 7 and S.n_con == 1
    for xi_z in feasible_xi(Z, rng, 8):
        for xi_w in feasible_xi(W, rng, 3):
            p = (Z.c + Z.G @ xi_z) + (W.c + W.G @ xi_w)
            assert S.contains(p, 1e-6)
    # Every point of the sum decomposes: check the hull identity for boxes.
    A = ConstrainedZonotope.from_box([-1.0, -1.0], [1.0, 1.0])
    B = ConstrainedZonotope.from_box([0.0, 0.0], [2.0, 4.0])
    h = (A + B).interval_hull()
    assert np.allclose(h.lo, [-1.0, -1.0]) and np.allclose(h.hi, [3.0, 5.0])
    with pytest.raises(DimensionError):
        X0 + ConstrainedZonotope.singleton([0.0])


def test_generalized_intersect_exact():
    rng = np.random.default_rng(12)
    for _ in range(20):
        Z = random_cz(rng, 2, 4, 0)
        Y = random_cz(rng, 1, 2, 0)
        R = rng.normal(size=(1, 2))
        I = Z.generalized_intersect(R, Y)
        assert I.n_gen == Z.n_gen + Y.n_gen
        assert I.n_con == Z.n_con + Y.n_con + 1
        # Membership in the intersection must agree with the predicate
        # x in Z and R x in Y on sampled points of Z.
        for x in Z.sample(15, seed=3):
            in_pred = Y.contains(R @ x, 1e-6)
            in_set = I.contains(x, 1e-6)
            if in_pred:
                assert in_set
        # Points sampled from the intersection satisfy the predicate.
        if not I.is_empty():
            for x in I.sample(10, seed=4):
                assert Z.contains(x, 1e-5)
                assert Y.contains(R @ x, 1e-5)


def test_cartesian_product():
    rng = np.random.default_rng(13)
    Z = random_cz(rng, 2, 3, 1)
    W = random_cz(rng, 1, 2, 0)
    P = Z.cartesian_product(W)
    assert P.dim == 3 and P.n_gen == 5 and P.n_con == 1
    for xi in feasible_xi(Z, rng, 5):
        x = Z.c + Z.G @ xi
        for xw in feasible_xi(W, rng, 3):
            w = W.c + W.G @ xw
            assert P.contains(np.concatenate([x, w]), 1e-6)


def test_interval_hull_matches_brute_force():
    h = X0.interval_hull()
    assert np.allclose(h.lo, [-1.5, 0.7], atol=1e-6)
    assert np.allclose(h.hi, [-1.2, 1.3], atol=1e-6)
    assert abs(X0.radius_metric() - 0.3) <= 1e-6
    # Plain zonotope closed form against the LP path.
    rng = np.random.default_rng(14)
    Z = random_cz(rng, 3, 5, 0)
    Zc = ConstrainedZonotope(Z.G, Z.c, np.zeros((0, 5)), np.zeros(0))
    h1 = Zc.interval_hull()
    pts = Z.sample(500, seed=5)
    assert np.all(pts >= h1.lo[None, :] - 1e-9)
    assert np.all(pts <= h1.hi[None, :] + 1e-9)


def test_center_not_always_member():
    # The representation center of the constrained set is not a member point.
    assert not X0.contains(X0.c, 1e-6)


def test_closest_point_matches_grid():
    h = X0.c
    p = X0.closest_point(h)
    assert X0.contains(p, 1e-6)
    # Brute-force grid over the feasible segment xi1 + xi2 + xi3 = -1.5.
    best = np.inf
    best_p = None
    for x1 in np.linspace(-1, 1, 81):
        for x2 in np.linspace(-1, 1, 81):
            x3 = -1.5 - x1 - x2
            if abs(x3) > 1.0:
                continue
            q = X0.c + X0.G @ np.array([x1, x2, x3])
            d = np.abs(q - h).sum()
            if d < best:
                best, best_p = d, q
    assert abs(np.abs(p - h).sum() - best) <= 1e-4


def test_rescale_with_center():
    h = X0.interval_hull().mid
    R = X0.rescale_with_center(h)
    assert np.allclose(R.c, h)
    assert R.n_gen == 2 * X0.n_gen
    assert R.n_con == 2 * X0.n_con + X0.dim
    # Same set: mutual sampled membership.
    for p in X0.sample(200, seed=6):
        assert R.contains(p, 1e-6)
    for p in R.sample(200, seed=7):
        assert X0.contains(p, 1e-6)
    with pytest.raises(ValueError):
        ConstrainedZonotope.singleton([0.0, 0.0]).rescale_with_center([1.0, 0.0])


def test_tighten_generator_bounds():
    lo, hi, empty = tighten_generator_bounds(X0.A, X0.b)
    assert not empty
    assert np.allclose(lo, [-1.0, -1.0, -1.0])
    assert np.allclose(hi, [0.5, 0.5, 0.5], atol=1e-9)
    # Unsatisfiable row is detected.
    _, _, empty = tighten_generator_bounds(np.array([[1.0, 1.0]]), np.array([5.0]))
    assert empty
    # No constraints: the unit box.
    lo, hi, empty = tighten_generator_bounds(np.zeros((0, 0)), np.zeros(0))
    assert not empty and lo.size == 0


def test_is_empty():
    assert not X0.is_empty()
    E = ConstrainedZonotope(np.eye(2), np.zeros(2),
                            np.array([[1.0, 1.0]]), np.array([5.0]))
    assert E.is_empty()


def test_rescale_to_box_preserves_set():
    R = rescale_to_box(X0)
    for p in X0.sample(200, seed=8):
        assert R.contains(p, 1e-6)
    for p in R.sample(200, seed=9):
        assert X0.contains(p, 1e-6)
    Z = ConstrainedZonotope.zonotope(np.eye(2), np.zeros(2))
    assert rescale_to_box(Z) is Z


def test_normalize_constraint_rows():
    N = normalize_constraint_rows(X0)
    assert np.abs(np.hstack([N.A, N.b[:, None]])).max(axis=1).max() <= 1.0 + 1e-12
    for p in X0.sample(100, seed=10):
        assert N.contains(p, 1e-6)
    Z = ConstrainedZonotope.zonotope(np.eye(2), np.zeros(2))
    assert normalize_constraint_rows(Z) is Z


def test_eliminate_constraints_encloses():
    Z1, trail = eliminate_constraints(X0, 1)
    assert Z1.n_con == 0 and Z1.n_gen == X0.n_gen - 1
    for p in X0.sample(1000, seed=11):
        assert Z1.contains(p, 1e-6)
    # Trail accumulation reproduces the new center from the old one.
    assert np.allclose(Z1.c, X0.c + trail.center_shift, atol=1e-9)
    with pytest.raises(ValueError):
        eliminate_constraints(X0, 2)


def test_eliminate_constraints_random_instances():
    rng = np.random.default_rng(15)
    for _ in range(15):
        Z = random_cz(rng, 2, 5, 2)
        R, trail = eliminate_constraints(Z, 2)
        assert R.n_con == 0
        assert np.allclose(R.c, Z.c + trail.center_shift, atol=1e-8)
        for p in Z.sample(50, seed=12):
            assert R.contains(p, 1e-5)


def test_reduce_generators_collinear():
    Z = ConstrainedZonotope.zonotope(np.array([[0.5, 0.3, 0.2]]), np.zeros(1))
    R = reduce_generators(Z, 1)
    assert R.n_gen == 1
    assert abs(abs(R.G[0, 0]) - 1.0) <= 1e-12


def test_reduce_generators_encloses():
    rng = np.random.default_rng(16)
    for nc in (0, 1, 2):
        Z = random_cz(rng, 2, 8, nc)
        target = 4 + nc
        R = reduce_generators(Z, target)
        assert R.n_gen == target and R.n_con == nc
        for p in Z.sample(300, seed=13):
            assert R.contains(p, 1e-5)
    # Already small enough: identity.
    Z = random_cz(rng, 2, 3, 0)
    assert reduce_generators(Z, 5) is Z
    with pytest.raises(ValueError):
        reduce_generators(random_cz(rng, 2, 8, 1), 2)


def test_interval_hull_empty_raises():
    E = ConstrainedZonotope(np.eye(2), np.zeros(2),
                            np.array([[1.0, 1.0]]), np.array([5.0]))
    with pytest.raises(EmptySetError):
        E.interval_hull()


def test_sample_membership():
    pts = X0.sample(1000, seed=14)
    assert pts.shape == (1000, 2)
    for p in pts[::25]:
        assert X0.contains(p, 1e-6)
    # Deterministic for a fixed seed.
    assert np.array_equal(pts, X0.sample(1000, seed=14))


def test_json_round_trip():
    s = X0.to_json()
    back = ConstrainedZonotope.from_json(s)
    assert np.array_equal(back.G, X0.G)
    assert np.array_equal(back.c, X0.c)
    assert np.array_equal(back.A, X0.A)
    assert np.array_equal(back.b, X0.b)
    Z = ConstrainedZonotope.zonotope(np.eye(2), np.ones(2))
    back = ConstrainedZonotope.from_json(Z.to_json())
    assert back.n_con == 0 and np.array_equal(back.G, Z.G)
