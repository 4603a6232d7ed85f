"""Concrete dynamics used by the bundled scenarios and tests.

All models are affine in the process disturbance, so the mean value route
can use the exact affine disturbance enclosure. Interval Jacobians and
half-Hessians are hand-coded from the closed-form derivatives.
"""

from __future__ import annotations

import math

import numpy as np

from . import intervals as iv
from .intervals import Interval, IntervalMatrix, IntervalVector
from .propagation import NonlinearModel


def _hessian_from_intervals(cells: dict, m: int) -> IntervalMatrix:
    """Assemble a half-Hessian from {(i, j): Interval} upper-triangle cells.

    Diagonal entries must already carry the factor 1/2.
    """
    lo = np.zeros((m, m))
    hi = np.zeros((m, m))
    for (i, j), val in cells.items():
        if j < i:
            raise ValueError("half-Hessian cells must be upper triangular")
        lo[i, j] = val.lo
        hi[i, j] = val.hi
    return IntervalMatrix(lo, hi)


class PlanarGrowthModel(NonlinearModel):
    """Two-state nonlinear benchmark map with additive disturbance.

        x1+ = 3 x1 - x1^2/7 - 4 x1 x2 / (4 + x1) + w1
        x2+ = -2 x2 + 3 x1 x2 / (4 + x1) + w2
    """

    n = 2
    n_w = 2
    n_u = 0
    affine_in_w = True

    def eval(self, x, u, w):
        x1, x2 = x
        den = 4.0 + x1
        return np.array(
            [
                3.0 * x1 - x1 * x1 / 7.0 - 4.0 * x1 * x2 / den + w[0],
                -2.0 * x2 + 3.0 * x1 * x2 / den + w[1],
            ]
        )

    def beta_x(self, x, u):
        return self.eval(x, u, np.zeros(2))

    def input_matrix_w(self, x, u):
        return np.eye(2)

    def jacobian_x(self, x_box, u, w_box):
        x1 = x_box[0]
        x2 = x_box[1]
        inv_den_sq = iv.sqr(iv.reciprocal_shift(x1, 4.0))
        j11 = 3.0 - x1 * (2.0 / 7.0) - 16.0 * x2 * inv_den_sq
        j12 = -4.0 * x1 * iv.reciprocal_shift(x1, 4.0)
        j21 = 12.0 * x2 * inv_den_sq
        j22 = -2.0 + 3.0 * x1 * iv.reciprocal_shift(x1, 4.0)
        return IntervalMatrix(
            [[j11.lo, j12.lo], [j21.lo, j22.lo]], [[j11.hi, j12.hi], [j21.hi, j22.hi]]
        )

    def jacobian_w(self, x, u, w_box):
        return IntervalMatrix.exact(np.eye(2))

    def hessians(self, z_box, u):
        # Augmented argument z = (x1, x2, w1, w2); w enters linearly.
        x1 = z_box[0]
        x2 = z_box[1]
        inv_den = iv.reciprocal_shift(x1, 4.0)
        inv_den_sq = iv.sqr(inv_den)
        inv_den_cu = inv_den_sq * inv_den
        h1 = _hessian_from_intervals(
            {
                (0, 0): 0.5 * (-2.0 / 7.0 + 32.0 * x2 * inv_den_cu),
                (0, 1): -16.0 * inv_den_sq,
            },
            4,
        )
        h2 = _hessian_from_intervals(
            {
                (0, 0): 0.5 * (-24.0 * x2 * inv_den_cu),
                (0, 1): 12.0 * inv_den_sq,
            },
            4,
        )
        return [h1, h2]


class QuadraticModel(NonlinearModel):
    """Generic quadratic map, mainly an oracle-friendly test vehicle.

    f_q(z) = c_q + l_q' z + z' S_q z over the augmented z = (x, w), with S_q
    upper triangular. Derivatives are exact, so enclosure failures isolate
    propagation bugs rather than inclusion-function slack.
    """

    def __init__(self, n, n_w, const, lin, quad, affine_in_w=False):
        self.n = int(n)
        self.n_w = int(n_w)
        self.n_u = 0
        self.const = np.asarray(const, dtype=float)
        self.lin = np.asarray(lin, dtype=float)  # n x (n + n_w)
        self.quad = [np.triu(np.asarray(S, dtype=float)) for S in quad]
        if affine_in_w:
            m = self.n + self.n_w
            for S in self.quad:
                S[:, self.n :] = 0.0
                S[self.n :, :] = 0.0
        self.affine_in_w = bool(affine_in_w)

    def eval(self, x, u, w):
        z = np.concatenate([np.atleast_1d(x), np.atleast_1d(w)])
        return self.const + self.lin @ z + np.array([z @ S @ z for S in self.quad])

    def beta_x(self, x, u):
        return self.eval(x, u, np.zeros(self.n_w))

    def input_matrix_w(self, x, u):
        return self.lin[:, self.n :]

    def _jacobian_box(self, z_box: IntervalVector) -> IntervalMatrix:
        rows_lo, rows_hi = [], []
        for q, S in enumerate(self.quad):
            sym = S + S.T
            row = iv.interval_matvec(IntervalMatrix.exact(sym), z_box)
            rows_lo.append(self.lin[q] + row.lo)
            rows_hi.append(self.lin[q] + row.hi)
        return IntervalMatrix(np.vstack(rows_lo), np.vstack(rows_hi))

    def jacobian_x(self, x_box, u, w_box):
        J = self._jacobian_box(x_box.concat(w_box))
        return IntervalMatrix(J.lo[:, : self.n], J.hi[:, : self.n])

    def jacobian_w(self, x, u, w_box):
        x = np.asarray(x, dtype=float)
        J = self._jacobian_box(IntervalVector(x, x).concat(w_box))
        return IntervalMatrix(J.lo[:, self.n :], J.hi[:, self.n :])

    def hessians(self, z_box, u):
        out = []
        for S in self.quad:
            half = np.triu(S, k=1) + np.triu(S.T, k=1) + np.diag(np.diag(S))
            out.append(IntervalMatrix.exact(half))
        return out

    @classmethod
    def random(cls, rng, n=2, n_w=1, scale=0.3, affine_in_w=False):
        m = n + n_w
        return cls(
            n,
            n_w,
            rng.normal(size=n) * 0.2,
            rng.normal(size=(n, m)),
            [np.triu(rng.normal(size=(m, m))) * scale for _ in range(n)],
            affine_in_w=affine_in_w,
        )


class QuadrotorModel(NonlinearModel):
    """Euler-discretized 12-state quadrotor with disturbance forces.

    State: position (x, y, z), inertial velocity (u, v, w), Euler angles
    (phi, theta, psi), body rates (p, q, r). Input: thrust and the three
    differential torque commands. Disturbance: body forces (Dx, Dy, Dz).
    """

    n = 12
    n_w = 3
    n_u = 4
    affine_in_w = True

    def __init__(self, ts=0.01, mass=0.7, arm=0.3, inertia=1.2416, gravity=9.81):
        self.ts = ts
        self.mass = mass
        self.arm = arm
        self.ixx = self.iyy = self.izz = inertia
        self.g = gravity

    def _rates(self, x, u, w):
        m, l, g = self.mass, self.arm, self.g
        px, py, pz, vu, vv, vw, phi, th, psi, p, q, r = x
        u1, u2, u3, u4 = u
        sphi, cphi = math.sin(phi), math.cos(phi)
        sth, cth = math.sin(th), math.cos(th)
        spsi, cpsi = math.sin(psi), math.cos(psi)
        tth = math.tan(th)
        sec = 1.0 / cth
        a1 = (self.iyy - self.izz) / self.ixx
        a2 = (self.izz - self.ixx) / self.iyy
        a3 = (self.ixx - self.iyy) / self.izz
        return np.array(
            [
                vu,
                vv,
                vw,
                (cpsi * sth * cphi + spsi * sphi) * u1 / m + w[0] / m,
                (spsi * sth * cphi - cpsi * sphi) * u1 / m + w[1] / m,
                -g + cth * cphi * u1 / m + w[2] / m,
                p + q * sphi * tth + r * cphi * tth,
                q * cphi - r * sphi,
                q * sphi * sec + r * cphi * sec,
                a1 * q * r + l * u2 / self.ixx,
                a2 * p * r + l * u3 / self.iyy,
                a3 * p * q + u4 / self.izz,
            ]
        )

    def eval(self, x, u, w):
        x = np.asarray(x, dtype=float)
        return x + self.ts * self._rates(x, u, np.asarray(w, dtype=float))

    def beta_x(self, x, u):
        return self.eval(x, u, np.zeros(3))

    def input_matrix_w(self, x, u):
        B = np.zeros((12, 3))
        B[3, 0] = B[4, 1] = B[5, 2] = self.ts / self.mass
        return B

    def jacobian_w(self, x, u, w_box):
        return IntervalMatrix.exact(self.input_matrix_w(x, u))

    def jacobian_x(self, x_box, u, w_box):
        ts, m, l = self.ts, self.mass, self.arm
        u1, u2, u3, u4 = u
        phi, th, psi = x_box[6], x_box[7], x_box[8]
        p, q, r = x_box[9], x_box[10], x_box[11]
        sphi, cphi = iv.sin(phi), iv.cos(phi)
        sth, cth = iv.sin(th), iv.cos(th)
        spsi, cpsi = iv.sin(psi), iv.cos(psi)
        tth, sec = iv.tan(th), iv.sec(th)
        sec2 = iv.sqr(sec)
        a1 = (self.iyy - self.izz) / self.ixx
        a2 = (self.izz - self.ixx) / self.iyy
        a3 = (self.ixx - self.iyy) / self.izz
        k = u1 / m
        cells = {
            (0, 3): Interval(1.0, 1.0),
            (1, 4): Interval(1.0, 1.0),
            (2, 5): Interval(1.0, 1.0),
            (3, 6): k * (-1.0 * cpsi * sth * sphi + spsi * cphi),
            (3, 7): k * (cpsi * cth * cphi),
            (3, 8): k * (-1.0 * spsi * sth * cphi + cpsi * sphi),
            (4, 6): k * (-1.0 * spsi * sth * sphi - cpsi * cphi),
            (4, 7): k * (spsi * cth * cphi),
            (4, 8): k * (cpsi * sth * cphi + spsi * sphi),
            (5, 6): -k * cth * sphi,
            (5, 7): -k * sth * cphi,
            (6, 6): q * cphi * tth - r * sphi * tth,
            (6, 7): (q * sphi + r * cphi) * sec2,
            (6, 9): Interval(1.0, 1.0),
            (6, 10): sphi * tth,
            (6, 11): cphi * tth,
            (7, 6): -1.0 * q * sphi - r * cphi,
            (7, 10): cphi,
            (7, 11): -sphi,
            (8, 6): (q * cphi - r * sphi) * sec,
            (8, 7): (q * sphi + r * cphi) * sec * tth,
            (8, 10): sphi * sec,
            (8, 11): cphi * sec,
            (9, 10): a1 * r,
            (9, 11): a1 * q,
            (10, 9): a2 * r,
            (10, 11): a2 * p,
            (11, 9): a3 * q,
            (11, 10): a3 * p,
        }
        lo = np.eye(12)
        hi = np.eye(12)
        for (i, j), val in cells.items():
            val = ts * val
            # One outward ulp covers the unrounded addition to the identity.
            lo[i, j] = np.nextafter(lo[i, j] + val.lo, -np.inf)
            hi[i, j] = np.nextafter(hi[i, j] + val.hi, np.inf)
        return IntervalMatrix(np.minimum(lo, hi), np.maximum(lo, hi))

    def hessians(self, z_box, u):
        # Augmented z = (state, disturbance) in R^15; disturbances enter linearly.
        ts, m = self.ts, self.mass
        u1 = u[0]
        phi, th, psi = z_box[6], z_box[7], z_box[8]
        q, r = z_box[10], z_box[11]
        sphi, cphi = iv.sin(phi), iv.cos(phi)
        sth, cth = iv.sin(th), iv.cos(th)
        spsi, cpsi = iv.sin(psi), iv.cos(psi)
        tth, sec = iv.tan(th), iv.sec(th)
        sec2 = iv.sqr(sec)
        k = ts * u1 / m
        zero = Interval(0.0, 0.0)
        out = [IntervalMatrix.zeros(15, 15) for _ in range(3)]
        t1 = cpsi * sth * cphi
        t2 = spsi * sphi
        s1 = spsi * sth * cphi
        s2 = cpsi * sphi
        out.append(
            _hessian_from_intervals(
                {
                    (6, 6): 0.5 * k * (-1.0 * t1 - t2),
                    (7, 7): 0.5 * k * (-1.0 * t1),
                    (8, 8): 0.5 * k * (-1.0 * t1 - t2),
                    (6, 7): k * (-1.0 * cpsi * cth * sphi),
                    (6, 8): k * (spsi * sth * sphi + cpsi * cphi),
                    (7, 8): k * (-1.0 * spsi * cth * cphi),
                },
                15,
            )
        )
        out.append(
            _hessian_from_intervals(
                {
                    (6, 6): 0.5 * k * (-1.0 * s1 + s2),
                    (7, 7): 0.5 * k * (-1.0 * s1),
                    (8, 8): 0.5 * k * (-1.0 * s1 + s2),
                    (6, 7): k * (-1.0 * spsi * cth * sphi),
                    (6, 8): k * (-1.0 * cpsi * sth * sphi + spsi * cphi),
                    (7, 8): k * (cpsi * cth * cphi),
                },
                15,
            )
        )
        out.append(
            _hessian_from_intervals(
                {
                    (6, 6): 0.5 * k * (-1.0 * cth * cphi),
                    (7, 7): 0.5 * k * (-1.0 * cth * cphi),
                    (6, 7): k * (sth * sphi),
                },
                15,
            )
        )
        out.append(
            _hessian_from_intervals(
                {
                    (6, 6): ts * 0.5 * (-1.0 * q * sphi * tth - r * cphi * tth),
                    (7, 7): ts * 0.5 * ((q * sphi + r * cphi) * 2.0 * sec2 * tth),
                    (6, 7): ts * ((q * cphi - r * sphi) * sec2),
                    (6, 10): ts * (cphi * tth),
                    (6, 11): ts * (-1.0 * sphi * tth),
                    (7, 10): ts * (sphi * sec2),
                    (7, 11): ts * (cphi * sec2),
                },
                15,
            )
        )
        out.append(
            _hessian_from_intervals(
                {
                    (6, 6): ts * 0.5 * (-1.0 * q * cphi + r * sphi),
                    (6, 10): ts * (-1.0 * sphi),
                    (6, 11): ts * (-1.0 * cphi),
                },
                15,
            )
        )
        out.append(
            _hessian_from_intervals(
                {
                    (6, 6): ts * 0.5 * (-1.0 * (q * sphi + r * cphi) * sec),
                    (7, 7): ts * 0.5 * ((q * sphi + r * cphi) * (sec * iv.sqr(tth) + sec * sec2)),
                    (6, 7): ts * ((q * cphi - r * sphi) * sec * tth),
                    (6, 10): ts * (cphi * sec),
                    (6, 11): ts * (-1.0 * sphi * sec),
                    (7, 10): ts * (sphi * sec * tth),
                    (7, 11): ts * (cphi * sec * tth),
                },
                15,
            )
        )
        a1 = (self.iyy - self.izz) / self.ixx
        a2 = (self.izz - self.ixx) / self.iyy
        a3 = (self.ixx - self.iyy) / self.izz
        out.append(_hessian_from_intervals({(10, 11): Interval(ts * a1, ts * a1)}, 15))
        out.append(_hessian_from_intervals({(9, 11): Interval(ts * a2, ts * a2)}, 15))
        out.append(_hessian_from_intervals({(9, 10): Interval(ts * a3, ts * a3)}, 15))
        return out
