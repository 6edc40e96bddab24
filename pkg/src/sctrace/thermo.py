"""Thermodynamic functions f, u, s, c from partition functions.

Analytic routes are used where a module can supply them (level sums,
harmonic-like closed forms, orbit sums); :func:`thermo_from_Z` is the
finite-difference fallback and the independent check on the others.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import mpmath

from .errors import DomainError, TruncationError
from .oracles import TRUNCATION
from .orbits import log_two_sinh


@dataclass(frozen=True)
class ThermoPoint:
    """One row of thermodynamic output; starred fields are reduced units."""

    T: float
    beta: float
    log_z: float
    f: float
    u: float
    s: float
    c: float
    method: str = ""
    T_star: Optional[float] = None
    f_star: Optional[float] = None
    u_star: Optional[float] = None
    s_star: Optional[float] = None
    extra: tuple = ()  # (name, value) pairs, e.g. harmonic/tunneling subtotals

    @property
    def Z(self):
        return math.exp(self.log_z) if self.log_z > -math.inf else 0.0


def from_log_derivatives(beta, log_z, dlog_z, d2log_z, k_b=1.0, method="", entropy=None):
    """Build a point from ln Z and its first two beta-derivatives.

    ``entropy`` may be given when a cancellation-free expression is known;
    otherwise s = k_B beta (u - f).
    """
    f = -log_z / beta
    u = -dlog_z
    s = k_b * beta * (u - f) if entropy is None else entropy
    c = k_b * beta * beta * d2log_z
    return ThermoPoint(1.0 / (k_b * beta), beta, log_z, f, u, s, c, method)


def harmonic_like(beta, offset, quantum, k_b=1.0, method=""):
    """Z = exp(-beta offset) / 2 sinh(beta quantum / 2), in closed form.

    Covers the harmonic oscillator, the single-well formula, the quadratic
    quartic-uv result and the spin result (all differ only in offset/quantum).
    """
    y = 0.5 * beta * quantum
    e2 = math.exp(-2.0 * y)
    coth_m1 = 2.0 * e2 / -math.expm1(-2.0 * y)
    log_z = -beta * offset - log_two_sinh(y)
    u = offset + 0.5 * quantum * (1.0 + coth_m1)
    # y coth y - ln(2 sinh y) with the leading y cancelled analytically
    s = k_b * (y * coth_m1 - math.log1p(-e2))
    c = k_b * y * y * 4.0 * e2 / (1.0 - e2) ** 2
    return ThermoPoint(1.0 / (k_b * beta), beta, log_z, -log_z / beta, u, s, c, method)


def thermo_from_levels(levels: Iterable[float], beta, k_b=1.0, method="exact", complete=False):
    """Canonical averages over a discrete ascending spectrum.

    Weights are taken relative to the ground state, so u - E0 and the energy
    variance never suffer cancellation against E0. ``levels`` may be a lazy
    iterable; it is consumed only until the truncation rule is met.
    """
    levels = iter(levels)
    e0 = next(levels)
    lead = 0  # ground-state degeneracy
    rest = 0.0  # Boltzmann weight of excited levels, relative to the ground state
    m1 = m2 = 0.0
    done = False
    for e in itertools.chain([e0], levels):
        d = e - e0
        if d <= 0:
            lead += 1
            continue
        w = math.exp(-beta * d)
        rest += w
        m1 += w * d
        m2 += w * d * d
        if w < TRUNCATION * (lead + rest):
            done = True
            break
    if not (done or complete):
        raise TruncationError(f"level sum not converged at beta={beta:g}; request more levels")
    w_sum = lead + rest
    log_w = math.log(lead) + math.log1p(rest / lead)
    mean = m1 / w_sum
    var = max(m2 / w_sum - mean * mean, 0.0)
    log_z = -beta * e0 + log_w
    u = e0 + mean
    s = k_b * (beta * mean + log_w)
    c = k_b * beta * beta * var
    return ThermoPoint(1.0 / (k_b * beta), beta, log_z, -log_z / beta, u, s, c, method)


def _as_log(value):
    log_z = getattr(value, "log_z", None)
    if log_z is None:
        if not value > 0:
            raise DomainError(f"partition function must be positive, got {value!r}")
        log_z = mpmath.log(value) if isinstance(value, mpmath.mpf) else math.log(value)
    if not log_z > -math.inf:
        raise DomainError("partition function vanished on the stencil")
    return log_z


def thermo_from_Z(zfn: Callable, beta, k_b=1.0, rel_step=1e-4, method="", dps=None):
    """f, u, s, c by central differences on a grid uniform in y = ln(beta).

    u = -dL/dbeta with L = ln Z, from three- or five-point stencils in y; the
    five-point value is used when the two differ by more than 1e-6 (relative).
    c = du/dT, from central differences of u in ln T = -y + const, i.e.
    c = -k_B beta du/dy, with the same stencil rule.

    ``dps`` switches the arithmetic to mpmath at that many digits; ``zfn``
    must then accept mpmath arguments.
    """
    if dps is not None:
        with mpmath.workdps(dps):
            return _fd_point(zfn, mpmath.mpf(beta), k_b, mpmath.mpf(rel_step), method, mpmath)
    return _fd_point(zfn, float(beta), k_b, rel_step, method, math)


def _close(a, b):
    return abs(a - b) <= 1e-6 * max(abs(a), abs(b), 1e-300)


def _pick(three, five):
    return three if _close(three, five) else five


def _fd_point(zfn, beta, k_b, h, method, m):
    y = m.log(beta)
    L = {k: _as_log(zfn(m.exp(y + k * h))) for k in range(-4, 5) if k}
    L[0] = _as_log(zfn(beta))

    def dy(f, j):
        three = (f[j + 1] - f[j - 1]) / (2 * h)
        five = (-f[j + 2] + 8 * f[j + 1] - 8 * f[j - 1] + f[j - 2]) / (12 * h)
        return three, five

    # u at the five central nodes, each from its own five-point stencil
    u_nodes = {j: -dy(L, j)[1] / m.exp(y + j * h) for j in range(-2, 3)}
    u = -_pick(*dy(L, 0)) / beta
    c = -k_b * beta * _pick(*dy(u_nodes, 0))
    log_z = L[0]
    f = -log_z / beta
    s = k_b * beta * (u - f)
    if m is mpmath:
        return ThermoPoint(float(1 / (k_b * beta)), float(beta), float(log_z), float(f),
                           float(u), float(s), float(c), method)
    return ThermoPoint(1.0 / (k_b * beta), beta, log_z, f, u, s, c, method)


def finite_difference(zfn: Callable, k_b=1.0, rel_step=1e-4, method=""):
    """Adapt a beta -> Z callable into a beta -> ThermoPoint callable."""
    return lambda beta: thermo_from_Z(zfn, beta, k_b, rel_step, method)


def reduce_units(point: ThermoPoint, energy_unit, k_b=1.0) -> ThermoPoint:
    """Attach T* = k_B T / E_unit, f* = f / E_unit, u* = u / E_unit, s* = s / k_B."""
    return replace(
        point,
        T_star=k_b * point.T / energy_unit,
        f_star=point.f / energy_unit,
        u_star=point.u / energy_unit,
        s_star=point.s / k_b,
    )


def sweep(point_fn: Callable, temperatures, k_b=1.0, energy_unit=None):
    """Evaluate ``point_fn(beta)`` over an increasing temperature grid.

    ``energy_unit`` (typically hbar omega) switches on reduced-unit fields.
    """
    temps = [float(t) for t in temperatures]
    if any(t <= 0 for t in temps):
        raise DomainError("temperatures must be positive")
    if any(b <= a for a, b in zip(temps, temps[1:])):
        raise DomainError("temperature grid must be strictly increasing")
    rows = []
    for t in temps:
        p = point_fn(1.0 / (k_b * t))
        p = replace(p, T=t)
        if energy_unit is not None:
            p = reduce_units(p, energy_unit, k_b)
        rows.append(p)
    return rows
