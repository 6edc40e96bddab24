"""Wick-rotated classical dynamics.

After t -> -i tau the motion is ordinary Newtonian motion in the reversed
potential Vbar = -V:

    dq/dtau = p,  dp/dtau = V'(q),  H_bar = p^2/2 - V(q).

The tangent map obeys d(dq)/dtau = dp, d(dp)/dtau = V''(q(tau)) dq and the
Euclidean action accumulates as dS/dtau = p^2/2 + V(q).

Energies ``E`` in this module are always energies of the reversed system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre, polynomial as P

from .errors import DomainError, NumericalFailure
from .model import Potential

_GL_X, _GL_W = legendre.leggauss(16)


@dataclass(frozen=True)
class TangentState:
    """Phase point, tangent matrix and action after a rotated time ``tau``."""

    q: float
    p: float
    M: np.ndarray
    s_bar: float
    tau: float
    steps: int = 0
    error: float = 0.0  # last refinement change in (Tr M, S), relative

    @property
    def trace(self):
        return float(self.M[0, 0] + self.M[1, 1])

    @property
    def det(self):
        return float(self.M[0, 0] * self.M[1, 1] - self.M[0, 1] * self.M[1, 0])


def _rk4(potential, q, p, tau, n):
    jet = potential.jet
    h = tau / n
    h2 = 0.5 * h
    h6 = h / 6.0
    a, b, c, d = 1.0, 0.0, 0.0, 1.0  # M = [[a, b], [c, d]]
    s = 0.0
    for _ in range(n):
        v1, f1, k1 = jet(q)
        s1 = 0.5 * p * p + v1
        dq1, dp1 = p, f1
        da1, db1, dc1, dd1 = c, d, k1 * a, k1 * b

        q2 = q + h2 * dq1
        p2 = p + h2 * dp1
        a2, b2, c2, d2 = a + h2 * da1, b + h2 * db1, c + h2 * dc1, d + h2 * dd1
        v2, f2, k2 = jet(q2)
        s2 = 0.5 * p2 * p2 + v2
        da2, db2, dc2, dd2 = c2, d2, k2 * a2, k2 * b2

        q3 = q + h2 * p2
        p3 = p + h2 * f2
        a3, b3, c3, d3 = a + h2 * da2, b + h2 * db2, c + h2 * dc2, d + h2 * dd2
        v3, f3, k3 = jet(q3)
        s3 = 0.5 * p3 * p3 + v3
        da3, db3, dc3, dd3 = c3, d3, k3 * a3, k3 * b3

        q4 = q + h * p3
        p4 = p + h * f3
        a4, b4, c4, d4 = a + h * da3, b + h * db3, c + h * dc3, d + h * dd3
        v4, f4, k4 = jet(q4)
        s4 = 0.5 * p4 * p4 + v4
        da4, db4, dc4, dd4 = c4, d4, k4 * a4, k4 * b4

        q += h6 * (dq1 + 2.0 * p2 + 2.0 * p3 + p4)
        p += h6 * (dp1 + 2.0 * f2 + 2.0 * f3 + f4)
        a += h6 * (da1 + 2.0 * da2 + 2.0 * da3 + da4)
        b += h6 * (db1 + 2.0 * db2 + 2.0 * db3 + db4)
        c += h6 * (dc1 + 2.0 * dc2 + 2.0 * dc3 + dc4)
        d += h6 * (dd1 + 2.0 * dd2 + 2.0 * dd3 + dd4)
        s += h6 * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
    return q, p, a, b, c, d, s


def _curvature_scale(potential, q0):
    ks = [abs(potential.d2V(q0))]
    ks += [abs(potential.d2V(x)) for x in potential.critical_points()]
    return math.sqrt(max(ks + [1e-300]))


def flow_with_tangent(potential: Potential, q0, p0, tau_final, tolerance=1e-10,
                      max_steps=2**22, plateau=1e-6) -> TangentState:
    """Integrate the reversed-potential flow with its tangent map and action.

    Fixed-step RK4, halving the step until Tr M and the action change by less
    than ``tolerance`` between successive runs. Tr M is compared relative to
    the largest entry of M, the action relative to max(1, |S|).

    Orbits that skim a separatrix amplify round-off, so the refinement change
    can stall above ``tolerance`` although truncation error is gone. When it
    stops shrinking (RK4 should cut it 16-fold per halving) while already below
    ``plateau``, the result is accepted and the stalled value kept in ``error``.
    """
    if not tau_final > 0:
        raise DomainError(f"tau_final must be positive, got {tau_final!r}")
    omega = _curvature_scale(potential, q0)
    n = max(32, int(math.ceil(tau_final * omega / 0.05)))
    prev = cur = _rk4(potential, q0, p0, tau_final, n)
    last = math.inf
    while True:
        n *= 2
        if n > max_steps:
            raise NumericalFailure(
                f"tangent flow did not converge within {max_steps} steps",
                iterates=(prev, cur),
            )
        cur = _rk4(potential, q0, p0, tau_final, n)
        tr_prev, tr_cur = prev[2] + prev[5], cur[2] + cur[5]
        scale = max(1.0, abs(tr_cur), *(abs(x) for x in cur[2:6]))
        d_tr = abs(tr_cur - tr_prev) / scale
        d_s = abs(cur[6] - prev[6]) / max(1.0, abs(cur[6]))
        err = max(d_tr, d_s)
        if err < tolerance or (err < plateau and err > 0.5 * last):
            break
        last = err
        prev = cur
    q, p, a, b, c, d, s = cur
    return TangentState(q, p, np.array([[a, b], [c, d]]), s, tau_final, n, err)


@dataclass(frozen=True)
class Well:
    """A well of the reversed potential: the interval between two minima of V.

    ``e_bottom`` and ``e_top`` bound the reversed-system energies of the
    librations it supports.
    """

    index: int
    q_left: float
    q_right: float
    q_bottom: float
    e_bottom: float
    e_top: float
    omega_bottom: float

    @property
    def harmonic_period(self):
        return 2.0 * math.pi / self.omega_bottom


def wells(potential: Potential):
    """Wells of Vbar, ordered left to right."""
    crit = potential.critical_points()
    out = []
    mins = [i for i, q in enumerate(crit) if potential.d2V(q) > 0]
    for k, (i, j) in enumerate(zip(mins, mins[1:])):
        tops = [crit[m] for m in range(i + 1, j) if potential.d2V(crit[m]) < 0]
        if len(tops) != 1:
            raise NumericalFailure(f"cannot identify the barrier between minima {i} and {j}")
        qb = tops[0]
        ql, qr = crit[i], crit[j]
        out.append(Well(
            index=k,
            q_left=ql,
            q_right=qr,
            q_bottom=qb,
            e_bottom=-potential.V(qb),
            e_top=-max(potential.V(ql), potential.V(qr)),
            omega_bottom=math.sqrt(-potential.d2V(qb)),
        ))
    return out


def _check_energy(well, E):
    if not (well.e_bottom < E < well.e_top):
        raise DomainError(
            f"E={E!r} outside well {well.index} range ({well.e_bottom!r}, {well.e_top!r})"
        )


def _bisect(f, lo, hi):
    flo = f(lo)
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def turning_points(potential: Potential, well: Well, E):
    """Solve Vbar(q) = E on both sides of the well bottom."""
    _check_energy(well, E)
    f = lambda q: potential.V(q) + E  # noqa: E731
    if not (f(well.q_bottom) > 0 and f(well.q_left) < 0 and f(well.q_right) < 0):
        raise NumericalFailure(f"turning points of E={E!r} are not bracketed")
    return _bisect(f, well.q_bottom, well.q_left), _bisect(f, well.q_bottom, well.q_right)


def _adaptive_gl(f, a, b, rtol=1e-13, max_panels=20000):
    """Composite 16-point Gauss-Legendre with bisection of unconverged panels."""

    def panel(lo, hi):
        r = 0.5 * (hi - lo)
        return r * float(np.dot(_GL_W, f(0.5 * (lo + hi) + r * _GL_X)))

    whole = panel(a, b)
    tol = rtol * max(abs(whole), 1e-300)
    total = 0.0
    stack = [(a, b, whole)]
    count = 0
    while stack:
        lo, hi, coarse = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        count += 1
        # the split estimate is far more accurate than the difference suggests
        if abs(left + right - coarse) <= tol or count > max_panels:
            total += left + right
        else:
            stack.append((lo, mid, left))
            stack.append((mid, hi, right))
    return total


@dataclass(frozen=True)
class EnergyShellData:
    E: float
    q_minus: float
    q_plus: float
    period: float
    action: float


def _reduced_quotient(potential, q_lo, q_hi, E):
    # E + V(q) = -(q - q_lo)(q - q_hi) R(q), with R > 0 inside the well
    num = potential.coeffs.copy()
    num[0] += E
    quo, _ = P.polydiv(num, [q_lo * q_hi, -(q_lo + q_hi), 1.0])
    return -quo


def energy_shell(potential: Potential, well: Well, E, rtol=1e-13,
                 with_action=True) -> EnergyShellData:
    """Turning points, period and abbreviated action of the libration at E.

    q = q_c + A sin(theta) maps the turning points to theta = +-pi/2, after which
    both integrands are smooth:

        T = 2 int dtheta / sqrt(2 R),   W = 2 A^2 int cos^2(theta) sqrt(2 R) dtheta.
    """
    q_lo, q_hi = turning_points(potential, well, E)
    R = _reduced_quotient(potential, q_lo, q_hi, E)
    qc, amp = 0.5 * (q_lo + q_hi), 0.5 * (q_hi - q_lo)
    half = 0.5 * math.pi

    def r_of(theta):
        vals = P.polyval(qc + amp * np.sin(theta), R)
        return np.maximum(vals, 1e-300)

    period = 2.0 * _adaptive_gl(lambda t: 1.0 / np.sqrt(2.0 * r_of(t)), -half, half, rtol)
    action = math.nan
    if with_action:
        action = 2.0 * amp * amp * _adaptive_gl(
            lambda t: np.cos(t) ** 2 * np.sqrt(2.0 * r_of(t)), -half, half, rtol)
    return EnergyShellData(E, q_lo, q_hi, period, action)


def period_of_energy(potential: Potential, well: Well, E) -> float:
    """T(E) = 2 int dq / sqrt(2 (E - Vbar))."""
    return energy_shell(potential, well, E, with_action=False).period


def abbreviated_action(potential: Potential, well: Well, E) -> float:
    """W(E) = closed-loop integral of p dq; W -> 0 at the well bottom."""
    if E == well.e_bottom:
        return 0.0
    return energy_shell(potential, well, E).action
