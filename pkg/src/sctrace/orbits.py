"""Stationary orbits entering the trace formula.

Two families contribute: trivial orbits sitting at the minima of V (hyperbolic
points of the reversed potential) and librations inside the wells of the
reversed potential whose period divides hbar*beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import energy_shell, flow_with_tangent, wells
from .errors import DomainError, NumericalFailure, UnsupportedDegeneracyError
from .model import DEGENERACY_TOL, Potential

TRM_MODES = ("literal", "floored")
DEFAULT_TRM_FLOOR = 1e-6
DEFAULT_N_MAX = 3
SCAN_POINTS = 64


def log_two_sinh(y):
    """ln(2 sinh y) for y > 0 without overflow."""
    return y + math.log1p(-math.exp(-2.0 * y))


@dataclass(frozen=True)
class Equilibrium:
    q: float
    V: float
    Vpp: float
    kind: str  # "hyperbolic" (minimum of V) or "elliptic" (maximum of V, spurious)

    @property
    def contributes(self):
        return self.kind == "hyperbolic"


@dataclass(frozen=True)
class OrbitContribution:
    """One stationary orbit and its term exp(-S/hbar)/sqrt(Tr M - 2).

    ``log_trm_m2`` is ln(Tr M - 2) after the amplitude mode was applied; it is
    NaN when the literal value is not positive. ``stability`` is set for trivial
    orbits, where Tr M = 2 cosh(stability * tau) and beta-derivatives of the
    amplitude are known in closed form.
    """

    kind: str
    h0: float
    s_bar: float
    trm: float
    log_trm_m2: float
    n: int = 1
    hbar: float = 1.0
    well: int = -1
    q: float = 0.0
    e_shell: Optional[float] = None
    mode: str = ""
    stability: Optional[float] = None
    s_bar_ode: Optional[float] = None
    residual: Optional[float] = None

    @property
    def singular(self):
        return not math.isfinite(self.log_trm_m2)

    @property
    def log_term(self):
        return -self.s_bar / self.hbar - 0.5 * self.log_trm_m2

    @property
    def term(self):
        return math.exp(self.log_term)

    @property
    def key(self):
        return (self.kind, self.well, self.n, round(self.q, 9) if self.kind == "trivial" else 0)

    def dlog_amp(self, beta):
        """d/dbeta ln(Tr M - 2), closed form for trivial orbits."""
        lam = self.stability * self.hbar
        y = 0.5 * lam * beta
        e = math.exp(-2.0 * y)
        return lam * (1.0 + 2.0 * e / -math.expm1(-2.0 * y))

    def d2log_amp(self, beta):
        lam = self.stability * self.hbar
        y = 0.5 * lam * beta
        e = math.exp(-2.0 * y)
        # -lam^2 / (2 sinh^2 y)
        return -2.0 * lam * lam * e / (1.0 - e) ** 2


def classify_equilibria(potential: Potential, search_interval=None):
    """All real critical points of V, sorted, tagged by their role."""
    out = []
    for q in potential.critical_points():
        if search_interval is not None and not (search_interval[0] <= q <= search_interval[1]):
            continue
        vpp = potential.d2V(q)
        if abs(vpp) < DEGENERACY_TOL:
            raise UnsupportedDegeneracyError(f"V''({q:g}) = {vpp:g}")
        out.append(Equilibrium(q, potential.V(q), vpp, "hyperbolic" if vpp > 0 else "elliptic"))
    return out


def trivial_contribution(v0, vpp, beta, hbar=1.0, q=0.0, h0=None):
    """Trivial orbit at a minimum with value ``v0`` and curvature ``vpp``."""
    if not vpp > 0:
        raise DomainError(f"curvature must be positive, got {vpp!r}")
    lam = math.sqrt(vpp)
    tau = hbar * beta
    x = lam * tau
    trm = 2.0 * math.cosh(x) if x < 700 else math.inf
    return OrbitContribution(
        kind="trivial",
        h0=v0 if h0 is None else h0,
        s_bar=v0 * tau,
        trm=trm,
        log_trm_m2=2.0 * log_two_sinh(0.5 * x),
        hbar=hbar,
        q=q,
        stability=lam,
    )


def trivial_contributions(potential: Potential, beta, hbar=1.0):
    """Contributions of every minimum of V; maxima are discarded as spurious."""
    eqs = [e for e in classify_equilibria(potential) if e.contributes]
    if not eqs:
        raise DomainError("potential has no minimum")
    return [trivial_contribution(e.V, e.Vpp, beta, hbar, q=e.q) for e in eqs]


def apply_trm_mode(trm, mode, floor=DEFAULT_TRM_FLOOR):
    """ln(Tr M - 2) under the chosen amplitude regularization."""
    if mode == "literal":
        return math.log(trm - 2.0) if trm > 2.0 else math.nan
    if mode == "floored":
        if not floor > 0:
            raise DomainError("trm_floor must be positive")
        return math.log(max(trm - 2.0, floor))
    raise DomainError(f"unknown trm mode {mode!r}")


def _scan_energies(well):
    # log-spaced distances to the separatrix, from the bottom upward
    span = well.e_top - well.e_bottom
    frac = np.logspace(0.0, -12.0, SCAN_POINTS)[1:]
    return [well.e_top - span * f for f in frac]


def _period_brackets(potential, well, target):
    """Energy intervals on which T(E) - target changes sign."""
    e_prev, t_prev = well.e_bottom, well.harmonic_period
    out = []
    for E in _scan_energies(well):
        if not E > e_prev:
            continue
        t = energy_shell(potential, well, E, with_action=False).period
        if (t_prev - target) * (t - target) < 0 or t == target:
            out.append((e_prev, E))
        e_prev, t_prev = E, t
    return out


def _solve_period(potential, well, target, lo, hi, n):
    def g(E):
        if E <= well.e_bottom:
            return well.harmonic_period - target
        return energy_shell(potential, well, E, with_action=False).period - target

    g_lo = g(lo)
    span = well.e_top - well.e_bottom
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-12 * span or mid in (lo, hi):
            return mid
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    raise NumericalFailure(f"period root not converged in well {well.index}, n={n}",
                           iterates=(lo, hi))


def find_librations(potential: Potential, beta, n_max=DEFAULT_N_MAX, hbar=1.0,
                    trm_mode="floored", trm_floor=DEFAULT_TRM_FLOOR, tolerance=1e-10):
    """Librations of period hbar*beta/n in every well of the reversed potential.

    Brackets come from a scan of T(E) (not assumed monotone), refined by
    bisection. The action is S = n W(E) - E tau, the energy in the original system is
    H0 = -E, and Tr M comes from integrating the tangent map once around the
    full time tau starting at the right turning point.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    tau = hbar * beta
    out = []
    for well in wells(potential):
        for n in range(1, n_max + 1):
            target = tau / n
            if target <= well.harmonic_period:
                continue
            for lo, hi in _period_brackets(potential, well, target):
                E = _solve_period(potential, well, target, lo, hi, n)
                shell = energy_shell(potential, well, E)
                flow = flow_with_tangent(potential, shell.q_plus, 0.0, tau, tolerance)
                out.append(OrbitContribution(
                    kind="libration",
                    h0=-E,
                    s_bar=n * shell.action - E * tau,
                    trm=flow.trace,
                    log_trm_m2=apply_trm_mode(flow.trace, trm_mode, trm_floor),
                    n=n,
                    hbar=hbar,
                    well=well.index,
                    q=shell.q_plus,
                    e_shell=E,
                    mode=trm_mode,
                    s_bar_ode=flow.s_bar,
                    residual=math.hypot(flow.q - shell.q_plus, flow.p),
                ))
    return out
