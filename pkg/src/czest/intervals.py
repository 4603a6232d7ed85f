"""Outward-rounded interval arithmetic for scalars, vectors, and matrices.

Every arithmetic result is widened by one representable step on each
endpoint, so the returned interval always contains the exact real image of
its operands. Sums widen by one step per accumulated term. This trades a
few ulps of tightness for portability (no FPU rounding-mode control).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_INF = float("inf")
# Double-width representation of pi: PI_HI + PI_LO ~ pi to ~32 digits.
_PI_HI = 3.141592653589793
_PI_LO = 1.2246467991473532e-16
_TWO_PI = 2.0 * _PI_HI


class IntervalDomainError(ValueError):
    """Operand interval leaves the domain of the requested function."""


def _down(x):
    return np.nextafter(x, -_INF)


def _up(x):
    return np.nextafter(x, _INF)


@dataclass(frozen=True)
class Interval:
    """Compact real interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        lo = float(self.lo)
        hi = float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval endpoints [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def diam(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def __add__(self, other):
        o = _as_interval(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_as_interval(other))

    def __rsub__(self, other):
        return _as_interval(other) + (-self)

    def __mul__(self, other):
        o = _as_interval(other)
        cands = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(_down(min(cands)), _up(max(cands)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_interval(other)
        if o.lo <= 0.0 <= o.hi:
            raise IntervalDomainError(f"division by interval containing zero: [{o.lo}, {o.hi}]")
        cands = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval(_down(min(cands)), _up(max(cands)))

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise IntervalDomainError("empty intersection")
        return Interval(lo, hi)


def _as_interval(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval(float(x), float(x))


def point(x: float) -> Interval:
    return Interval(float(x), float(x))


# ---------------------------------------------------------------------------
# Transcendental functions. Monotone branches use endpoint evaluation;
# sin/cos insert interior extrema explicitly.
# ---------------------------------------------------------------------------


def _has_extremum(lo: float, hi: float, offset: float) -> bool:
    # True if offset + 2*pi*k lies in [lo, hi] for some integer k.
    # Widen slightly to stay safe under the inexactness of pi.
    slack = 4.0 * np.spacing(max(abs(lo), abs(hi), 1.0))
    k_min = math.ceil((lo - offset - slack) / _TWO_PI)
    k_max = math.floor((hi - offset + slack) / _TWO_PI)
    return k_min <= k_max


def sin(x: Interval) -> Interval:
    if x.diam >= _TWO_PI:
        return Interval(-1.0, 1.0)
    vals = [math.sin(x.lo), math.sin(x.hi)]
    lo, hi = min(vals), max(vals)
    if _has_extremum(x.lo, x.hi, 0.5 * _PI_HI):
        hi = 1.0
    if _has_extremum(x.lo, x.hi, -0.5 * _PI_HI):
        lo = -1.0
    return Interval(max(_down(lo), -1.0), min(_up(hi), 1.0))


def cos(x: Interval) -> Interval:
    if x.diam >= _TWO_PI:
        return Interval(-1.0, 1.0)
    vals = [math.cos(x.lo), math.cos(x.hi)]
    lo, hi = min(vals), max(vals)
    if _has_extremum(x.lo, x.hi, 0.0):
        hi = 1.0
    if _has_extremum(x.lo, x.hi, _PI_HI):
        lo = -1.0
    return Interval(max(_down(lo), -1.0), min(_up(hi), 1.0))


def _check_no_pole(x: Interval, fn: str):
    # Poles of tan/sec at pi/2 + k*pi.
    if x.diam >= _PI_HI or _has_extremum(x.lo, x.hi, 0.5 * _PI_HI) or _has_extremum(
        x.lo, x.hi, 0.5 * _PI_HI + _PI_HI
    ):
        raise IntervalDomainError(f"{fn} undefined on [{x.lo}, {x.hi}]: contains odd multiple of pi/2")


def tan(x: Interval) -> Interval:
    _check_no_pole(x, "tan")
    return Interval(_down(math.tan(x.lo)), _up(math.tan(x.hi)))


def sec(x: Interval) -> Interval:
    _check_no_pole(x, "sec")
    c = cos(x)
    return 1.0 / c


def sqrt(x: Interval) -> Interval:
    if x.lo < 0.0:
        raise IntervalDomainError(f"sqrt undefined on [{x.lo}, {x.hi}]")
    return Interval(max(_down(math.sqrt(x.lo)), 0.0), _up(math.sqrt(x.hi)))


def sqr(x: Interval) -> Interval:
    a, b = abs(x.lo), abs(x.hi)
    hi = max(a, b) ** 2
    lo = 0.0 if x.lo <= 0.0 <= x.hi else min(a, b) ** 2
    return Interval(max(_down(lo), 0.0), _up(hi))


def reciprocal_shift(x: Interval, k: float) -> Interval:
    """Enclosure of 1 / (k + x)."""
    shifted = x + k
    if shifted.lo <= 0.0 <= shifted.hi:
        raise IntervalDomainError(
            f"reciprocal_shift undefined: 0 in [{shifted.lo}, {shifted.hi}]"
        )
    return 1.0 / shifted


# ---------------------------------------------------------------------------
# Interval vectors and matrices, backed by endpoint arrays.
# ---------------------------------------------------------------------------


class _IntervalArray:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape:
            raise ValueError("endpoint shape mismatch")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ValueError("invalid interval endpoints")
        self.lo = lo
        self.hi = hi

    @property
    def shape(self):
        return self.lo.shape

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self):
        return 0.5 * (self.hi - self.lo)

    @property
    def diam(self):
        return self.hi - self.lo

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))


class IntervalVector(_IntervalArray):
    """Axis-aligned box: one Interval per coordinate."""

    @classmethod
    def from_intervals(cls, items):
        items = list(items)
        return cls([it.lo for it in items], [it.hi for it in items])

    def __len__(self):
        return self.lo.shape[0]

    def __getitem__(self, i) -> Interval:
        return Interval(self.lo[i], self.hi[i])

    def concat(self, other: "IntervalVector") -> "IntervalVector":
        return IntervalVector(np.concatenate([self.lo, other.lo]), np.concatenate([self.hi, other.hi]))

    def __add__(self, other):
        if isinstance(other, IntervalVector):
            return IntervalVector(_down(self.lo + other.lo), _up(self.hi + other.hi))
        other = np.asarray(other, dtype=float)
        return IntervalVector(_down(self.lo + other), _up(self.hi + other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, IntervalVector):
            return IntervalVector(_down(self.lo - other.hi), _up(self.hi - other.lo))
        other = np.asarray(other, dtype=float)
        return IntervalVector(_down(self.lo - other), _up(self.hi - other))


class IntervalMatrix(_IntervalArray):
    """Dense matrix of intervals."""

    @classmethod
    def exact(cls, m) -> "IntervalMatrix":
        m = np.asarray(m, dtype=float)
        return cls(m.copy(), m.copy())

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntervalMatrix":
        z = np.zeros((rows, cols))
        return cls(z, z.copy())

    def __getitem__(self, idx) -> Interval:
        return Interval(self.lo[idx], self.hi[idx])

    def __sub__(self, other):
        if isinstance(other, IntervalMatrix):
            return IntervalMatrix(_down(self.lo - other.hi), _up(self.hi - other.lo))
        other = np.asarray(other, dtype=float)
        return IntervalMatrix(_down(self.lo - other), _up(self.hi - other))

    def __add__(self, other):
        if isinstance(other, IntervalMatrix):
            return IntervalMatrix(_down(self.lo + other.lo), _up(self.hi + other.hi))
        other = np.asarray(other, dtype=float)
        return IntervalMatrix(_down(self.lo + other), _up(self.hi + other))

    @property
    def T(self) -> "IntervalMatrix":
        return IntervalMatrix(self.lo.T.copy(), self.hi.T.copy())


def _widen_sum(lo, hi, terms: int):
    # Accumulating `terms` floating additions can stray by ~terms ulps.
    pad = float(terms) * np.spacing(np.maximum(np.abs(lo), np.abs(hi)) + 1e-300)
    return lo - pad, hi + pad


def real_matmul_interval(R, M: IntervalMatrix) -> IntervalMatrix:
    """Enclosure of R @ M for a real matrix R."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    rp = np.maximum(R, 0.0)
    rn = np.minimum(R, 0.0)
    lo = rp @ M.lo + rn @ M.hi
    hi = rp @ M.hi + rn @ M.lo
    lo, hi = _widen_sum(lo, hi, R.shape[1])
    return IntervalMatrix(lo, hi)


def interval_matmul_real(M: IntervalMatrix, R) -> IntervalMatrix:
    R = np.atleast_2d(np.asarray(R, dtype=float))
    return real_matmul_interval(R.T, M.T).T


def interval_matvec_real(M: IntervalMatrix, v) -> IntervalVector:
    """Enclosure of M @ v for a real vector v."""
    v = np.asarray(v, dtype=float)
    vp = np.maximum(v, 0.0)
    vn = np.minimum(v, 0.0)
    lo = M.lo @ vp + M.hi @ vn
    hi = M.hi @ vp + M.lo @ vn
    lo, hi = _widen_sum(lo, hi, v.shape[0])
    return IntervalVector(lo, hi)


def interval_matvec(M: IntervalMatrix, v: IntervalVector) -> IntervalVector:
    """Enclosure of M @ v for an interval vector v."""
    cands = np.stack(
        [
            M.lo * v.lo[None, :],
            M.lo * v.hi[None, :],
            M.hi * v.lo[None, :],
            M.hi * v.hi[None, :],
        ]
    )
    lo = cands.min(axis=0).sum(axis=1)
    hi = cands.max(axis=0).sum(axis=1)
    lo, hi = _widen_sum(lo, hi, len(v))
    return IntervalVector(lo, hi)


def sandwich(R_left, M: IntervalMatrix, R_right) -> IntervalMatrix:
    """Enclosure of R_left @ M @ R_right with real outer factors."""
    return interval_matmul_real(real_matmul_interval(R_left, M), R_right)
