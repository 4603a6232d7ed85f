"""Interval arithmetic: containment of the exact image, dense-sampling oracles."""

import math

import numpy as np
import pytest

from czest import intervals as iv
from czest.intervals import (
    Interval,
    IntervalDomainError,
    IntervalMatrix,
    IntervalVector,
    interval_matvec,
    interval_matvec_real,
    real_matmul_interval,
    sandwich,
)


def sample(x: Interval, n=41):
    return np.linspace(x.lo, x.hi, n)


def test_constructor_rejects_bad_endpoints():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        Interval(float("nan"), 0.0)


def test_basic_descriptors():
    x = Interval(-1.0, 3.0)
    assert x.mid == 1.0
    assert x.rad == 2.0
    assert x.diam == 4.0
    assert x.contains(3.0) and not x.contains(3.1)
    assert x.contains(3.05, tol=0.1)


def test_arithmetic_contains_exact_image():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = np.sort(rng.uniform(-5, 5, 2))
        c, d = np.sort(rng.uniform(-5, 5, 2))
        x = Interval(a, b)
        y = Interval(c, d)
        xs, ys = sample(x), sample(y)
        grid_sum = xs[:, None] + ys[None, :]
        grid_mul = xs[:, None] * ys[None, :]
        s = x + y
        m = x * y
        assert s.lo <= grid_sum.min() and grid_sum.max() <= s.hi
        assert m.lo <= grid_mul.min() and grid_mul.max() <= m.hi
        diff = x - y
        grid_diff = xs[:, None] - ys[None, :]
        assert diff.lo <= grid_diff.min() and grid_diff.max() <= diff.hi
        if not (c <= 0.0 <= d):
            q = x / y
            grid_div = xs[:, None] / ys[None, :]
            assert q.lo <= grid_div.min() and grid_div.max() <= q.hi


def test_division_by_zero_interval_raises():
    with pytest.raises(IntervalDomainError):
        Interval(1.0, 2.0) / Interval(-1.0, 1.0)


def test_scalar_mixing_and_neg():
    x = Interval(-1.0, 2.0)
    assert (3.0 + x).contains(1.0 + 3.0 - 2.0)
    assert (-x).lo == -2.0 and (-x).hi == 1.0
    y = 2.0 * x
    assert y.lo <= -2.0 and y.hi >= 4.0
    r = 1.0 / Interval(2.0, 4.0)
    assert r.lo <= 0.25 and r.hi >= 0.5


def test_hull_and_intersect():
    a = Interval(0.0, 1.0)
    b = Interval(0.5, 2.0)
    h = a.hull(b)
    assert h.lo == 0.0 and h.hi == 2.0
    i = a.intersect(b)
    assert i.lo == 0.5 and i.hi == 1.0
    with pytest.raises(IntervalDomainError):
        Interval(0.0, 1.0).intersect(Interval(2.0, 3.0))


@pytest.mark.parametrize("fn,ref", [(iv.sin, math.sin), (iv.cos, math.cos)])
def test_trig_contains_dense_samples(fn, ref):
    rng = np.random.default_rng(1)
    for _ in range(300):
        lo = rng.uniform(-10, 10)
        hi = lo + rng.uniform(0, 8)
        x = Interval(lo, hi)
        out = fn(x)
        vals = [ref(t) for t in sample(x, 101)]
        assert out.lo <= min(vals) + 1e-15
        assert max(vals) - 1e-15 <= out.hi
        assert out.lo >= -1.0 and out.hi <= 1.0


def test_trig_hits_interior_extrema():
    s = iv.sin(Interval(0.0, math.pi))
    assert s.hi == 1.0
    c = iv.cos(Interval(math.pi / 2, 3 * math.pi / 2))
    assert c.lo == -1.0
    full = iv.sin(Interval(0.0, 10.0))
    assert full.lo == -1.0 and full.hi == 1.0


def test_tan_sec_pole_detection():
    x = Interval(-0.4, 0.4)
    t = iv.tan(x)
    vals = [math.tan(v) for v in sample(x, 101)]
    assert t.lo <= min(vals) and max(vals) <= t.hi
    s = iv.sec(x)
    svals = [1.0 / math.cos(v) for v in sample(x, 101)]
    assert s.lo <= min(svals) and max(svals) <= s.hi
    with pytest.raises(IntervalDomainError):
        iv.tan(Interval(1.0, 2.0))  # contains pi/2
    with pytest.raises(IntervalDomainError):
        iv.sec(Interval(1.0, 2.0))


def test_sqrt_sqr():
    x = Interval(0.25, 4.0)
    r = iv.sqrt(x)
    assert r.lo <= 0.5 and 2.0 <= r.hi
    with pytest.raises(IntervalDomainError):
        iv.sqrt(Interval(-1.0, 1.0))
    q = iv.sqr(Interval(-2.0, 1.0))
    assert q.lo == 0.0 and q.hi >= 4.0
    q2 = iv.sqr(Interval(1.0, 3.0))
    assert q2.lo <= 1.0 and 9.0 <= q2.hi


def test_reciprocal_shift():
    # 1/(4 + [-1, 1]) must cover [1/5, 1/3].
    r = iv.reciprocal_shift(Interval(-1.0, 1.0), 4.0)
    xs = np.linspace(-1.0, 1.0, 201)
    vals = 1.0 / (4.0 + xs)
    assert r.lo <= vals.min() and vals.max() <= r.hi
    with pytest.raises(IntervalDomainError):
        iv.reciprocal_shift(Interval(-5.0, 5.0), 4.0)


def test_interval_vector_ops():
    v = IntervalVector([-1.0, 0.0], [1.0, 2.0])
    assert len(v) == 2
    assert v[1].lo == 0.0 and v[1].hi == 2.0
    assert np.allclose(v.mid, [0.0, 1.0])
    assert np.allclose(v.rad, [1.0, 1.0])
    w = v + np.array([1.0, 1.0])
    assert w.contains([2.0, 3.0])
    d = v - v
    assert d.contains([0.0, 0.0]) and d.lo[0] <= -2.0
    cat = v.concat(w)
    assert len(cat) == 4


def test_real_matmul_interval_oracle():
    rng = np.random.default_rng(2)
    for _ in range(50):
        R = rng.normal(size=(3, 2))
        lo = rng.normal(size=(2, 2))
        hi = lo + rng.uniform(0, 1, size=(2, 2))
        M = IntervalMatrix(lo, hi)
        out = real_matmul_interval(R, M)
        for _ in range(20):
            Mp = rng.uniform(lo, hi)
            P = R @ Mp
            assert np.all(out.lo <= P + 1e-12) and np.all(P - 1e-12 <= out.hi)


def test_interval_matvec_oracles():
    rng = np.random.default_rng(3)
    for _ in range(50):
        lo = rng.normal(size=(2, 3))
        hi = lo + rng.uniform(0, 1, size=(2, 3))
        M = IntervalMatrix(lo, hi)
        v = rng.normal(size=3)
        out = interval_matvec_real(M, v)
        vlo = rng.normal(size=3)
        vbox = IntervalVector(vlo, vlo + rng.uniform(0, 1, size=3))
        out2 = interval_matvec(M, vbox)
        for _ in range(20):
            Mp = rng.uniform(lo, hi)
            y = Mp @ v
            assert out.contains(y, tol=1e-12)
            vv = rng.uniform(vbox.lo, vbox.hi)
            assert out2.contains(Mp @ vv, tol=1e-12)


def test_sandwich_oracle():
    rng = np.random.default_rng(4)
    L = rng.normal(size=(2, 3))
    lo = rng.normal(size=(3, 3))
    M = IntervalMatrix(lo, lo + rng.uniform(0, 1, size=(3, 3)))
    R = rng.normal(size=(3, 2))
    out = sandwich(L, M, R)
    for _ in range(50):
        Mp = rng.uniform(M.lo, M.hi)
        P = L @ Mp @ R
        assert np.all(out.lo <= P + 1e-10) and np.all(P - 1e-10 <= out.hi)


def test_interval_matrix_helpers():
    E = IntervalMatrix.exact(np.eye(2))
    assert np.all(E.lo == E.hi)
    Z = IntervalMatrix.zeros(2, 3)
    assert Z.shape == (2, 3)
    T = IntervalMatrix([[0.0, 1.0]], [[0.5, 2.0]]).T
    assert T.shape == (2, 1)
    assert T[0, 0].hi == 0.5
    S = E + E
    assert S[0, 0].contains(2.0)
    D = E - E
    assert D[0, 0].contains(0.0)
