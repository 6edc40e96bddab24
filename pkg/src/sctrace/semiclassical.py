"""Semiclassical partition functions.

Everything is carried as ln Z: at the temperatures of interest Z itself
routinely underflows a double (the quartic system at alpha = 8 has
Z ~ exp(-64 beta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath

from .errors import DomainError, OutOfValidityError, SingularAmplitudeError
from .model import Potential
from .orbits import (
    DEFAULT_N_MAX,
    DEFAULT_TRM_FLOOR,
    OrbitContribution,
    find_librations,
    log_two_sinh,
    trivial_contribution,
    trivial_contributions,
)


def _lib(x):
    return mpmath if isinstance(x, mpmath.mpf) else math


def logsumexp(values):
    values = list(values)
    if not values:
        return -math.inf
    top = max(values)
    if top == -math.inf:
        return top
    return top + math.log(sum(math.exp(v - top) for v in values))


@dataclass(frozen=True)
class ZResult:
    """A partition function value, stored as its logarithm."""

    method: str
    beta: float
    log_z: float
    contributions: tuple = ()
    subtotals: dict = field(default_factory=dict)  # name -> ln(partial sum)
    warnings: tuple = ()

    @property
    def z(self):
        return math.exp(self.log_z) if self.log_z > -math.inf else 0.0

    def subtotal(self, name):
        v = self.subtotals.get(name, -math.inf)
        return math.exp(v) if v > -math.inf else 0.0


def assemble_trace(contribs: Sequence[OrbitContribution], beta=math.nan, method="trace"):
    """Z = sum_j exp(-S_j/hbar) / sqrt(Tr M_j - 2)."""
    contribs = tuple(contribs)
    for c in contribs:
        if c.singular:
            raise SingularAmplitudeError(
                f"{c.kind} orbit (well {c.well}, n={c.n}) has Tr M - 2 = {c.trm - 2.0:.3e} <= 0"
            )
    if not contribs:
        return ZResult(method, beta, -math.inf, (), {}, ("no stationary orbits",))
    harm = [c.log_term for c in contribs if c.kind == "trivial"]
    tunn = [c.log_term for c in contribs if c.kind != "trivial"]
    return ZResult(
        method,
        beta,
        logsumexp(harm + tunn),
        contribs,
        {"harmonic": logsumexp(harm), "tunneling": logsumexp(tunn)},
    )


def single_well_Z(V0, Vpp, beta, hbar=1.0):
    """Harmonic oscillator fitted at the minimum: exp(-beta V0) / 2 sinh(hbar sqrt(V'') beta / 2)."""
    if not Vpp > 0:
        raise DomainError(f"V'' must be positive, got {Vpp!r}")
    c = trivial_contribution(V0, Vpp, beta, hbar)
    return assemble_trace([c], beta, "single_well")


def multiwell_contributions(potential: Potential, beta, hbar=1.0, *, n_max=DEFAULT_N_MAX,
                            trm_mode="floored", trm_floor=DEFAULT_TRM_FLOOR, tunneling=True):
    out = trivial_contributions(potential, beta, hbar)
    if tunneling and len(out) > 1:
        out += find_librations(potential, beta, n_max, hbar, trm_mode, trm_floor)
    return out


def multiwell_Z(potential: Potential, beta, hbar=1.0, *, n_max=DEFAULT_N_MAX,
                trm_mode="floored", trm_floor=DEFAULT_TRM_FLOOR, tunneling=True):
    """Harmonic terms from every minimum of V plus tunneling librations."""
    contribs = multiwell_contributions(potential, beta, hbar, n_max=n_max, trm_mode=trm_mode,
                                       trm_floor=trm_floor, tunneling=tunneling)
    return assemble_trace(contribs, beta, "trace" if tunneling else "harmonic")


# quartic uv system, H = hbar omega (u v + alpha)^2

def quartic_uv_trivial(alpha, omega, beta, hbar=1.0) -> OrbitContribution:
    """Trivial orbit u = v = 0: frequency Omega = 2 omega alpha, H0 = hbar omega alpha^2."""
    big_omega = 2.0 * omega * alpha
    h0 = hbar * omega * alpha**2
    return trivial_contribution(h0, big_omega**2, beta, hbar)


def quartic_uv_Z_quadratic(alpha, omega, beta, hbar=1.0):
    """exp(-alpha^2 hbar omega beta) / 2 sinh(alpha hbar omega beta).

    Accepts mpmath numbers for beta, in which case ln Z is an mpf.
    """
    m = _lib(beta)
    x = alpha * hbar * omega * beta
    log_z = -alpha * x - (x + m.log1p(-m.exp(-2 * x)))
    return ZResult("sc_quadratic", beta, log_z)


def quartic_uv_f_sc(alpha, omega, beta, hbar=1.0):
    x = alpha * hbar * omega * beta
    return alpha**2 * hbar * omega + log_two_sinh(x) / beta


def quartic_uv_u_sc(alpha, omega, beta, hbar=1.0):
    x = alpha * hbar * omega * beta
    coth = 1.0 + 2.0 * math.exp(-2.0 * x) / -math.expm1(-2.0 * x)
    return alpha**2 * hbar * omega + hbar * omega * alpha * coth


@dataclass(frozen=True)
class HigherOrderCoeffs:
    """Expansion coefficients on the trivial orbit of the quartic uv system."""

    A0: float
    A_uv: float
    Phi_uv: complex
    Phi_uuvv: complex
    gamma: complex


def higher_order_coeffs(alpha, omega, beta, hbar=1.0) -> HigherOrderCoeffs:
    """Prefactor and action derivatives built from M_vv and its u'v'' derivative.

    On the trivial orbit M_vv = exp(Omega tau), d^2 Omega/du'dv'' =
    2 omega exp(-Omega tau), so d^2 M_vv/du'dv'' = tau * (that) * M_vv + 2 omega tau.
    """
    tau = hbar * beta
    big_omega = 2.0 * omega * alpha
    m_vv = math.exp(big_omega * tau)
    d2_omega = 2.0 * omega * math.exp(-big_omega * tau)
    d2_mvv = tau * d2_omega * m_vv + 2.0 * omega * tau
    a0 = m_vv**-0.5
    a_uv = -0.5 * d2_mvv * m_vv**-1.5
    phi_uv = -1j * hbar / m_vv
    phi_uuvv = 1j * hbar * d2_mvv / m_vv**2
    gamma = 0.5 * (1j * phi_uv / hbar - 1.0)
    return HigherOrderCoeffs(a0, a_uv, phi_uv, phi_uuvv, gamma)


def _higher_correction(alpha, omega, beta, hbar):
    # (hbar omega beta / 2) / sinh^2(x), written without overflow
    m = _lib(beta)
    x = alpha * hbar * omega * beta
    e = m.exp(-2 * x)
    return 2 * hbar * omega * beta * e / (1 - e) ** 2


def quartic_uv_Z_higher(alpha, omega, beta, hbar=1.0, via="closed"):
    """Z_sc (1 - (hbar omega beta/2) sinh^-2(alpha hbar omega beta)).

    ``via="coefficients"`` evaluates the correction from
    :func:`higher_order_coeffs` instead of the closed form.
    """
    base = quartic_uv_Z_quadratic(alpha, omega, beta, hbar)
    if via == "closed":
        corr = _higher_correction(alpha, omega, beta, hbar)
    elif via == "coefficients":
        k = higher_order_coeffs(alpha, omega, beta, hbar)
        factor = 1.0 - k.A_uv / (2.0 * k.gamma * k.A0) - k.Phi_uuvv / (8j * hbar * k.gamma**2)
        corr = 1.0 - factor.real
    else:
        raise DomainError(f"unknown evaluation path {via!r}")
    if corr >= 1:
        raise OutOfValidityError(
            f"fourth-order correction {float(corr):.3g} >= 1 at beta={float(beta):g}"
        )
    m = _lib(beta)
    return ZResult("sc_higher", beta, base.log_z + m.log1p(-corr))


def quartic_uv_higher_log_derivs(alpha, omega, beta, hbar=1.0):
    """ln(1 - eps) and its first two beta-derivatives, eps the higher-order correction."""
    w = hbar * omega
    k = alpha * w
    x = k * beta
    e2 = math.exp(-2.0 * x)
    g = 4.0 * e2 / (1.0 - e2) ** 2              # 1/sinh^2 x
    coth = 1.0 + 2.0 * e2 / -math.expm1(-2.0 * x)
    g1 = -2.0 * k * coth * g
    g2 = 2.0 * k * k * g * (g + 2.0 * coth * coth)
    eps = 0.5 * w * beta * g
    eps1 = 0.5 * w * (g + beta * g1)
    eps2 = 0.5 * w * (2.0 * g1 + beta * g2)
    if eps >= 1:
        raise OutOfValidityError(f"fourth-order correction {eps:.3g} >= 1 at beta={beta:g}")
    one = 1.0 - eps
    return math.log1p(-eps), -eps1 / one, -eps2 / one - (eps1 / one) ** 2


# spin in a uniform field, H = omega S_z

def spin_q_symbol(w, s, omega, hbar=1.0):
    """<w|omega S_z|w> = -hbar omega s (1 - |w|^2)/(1 + |w|^2)."""
    r = (w.conjugate() * w).real
    return -hbar * omega * s * (1.0 - r) / (1.0 + r)


def spin_q_symbol_qp(Q, P, s, omega, hbar=1.0):
    """Same function in the canonical (Q, P) variables."""
    return hbar * omega * 0.5 * (P * P + Q * Q) - hbar * omega * s


def spin_qp_from_w(w, s):
    r = (w.conjugate() * w).real
    k = math.sqrt(s / (1.0 + r))
    wc = w.conjugate()
    return (1j * k * (wc - w)).real, (k * (wc + w)).real


def solari_kochetov_integrand(w, s, omega, hbar=1.0):
    """(1/4)[d/dw*((1+w*w)^2/2s dH/dw) + d/dw((1+w*w)^2/2s dH/dw*)] for H = omega S_z.

    With r = w* w the symbol is a function of r alone, so both terms reduce to
    derivatives in r: dH/dw = w* H_r, d^2H/dw dw* = H_r + r H_rr.
    """
    r = (w.conjugate() * w).real
    h_r = 2.0 * hbar * omega * s / (1.0 + r) ** 2
    h_rr = -4.0 * hbar * omega * s / (1.0 + r) ** 3
    g = (1.0 + r) ** 2 / (2.0 * s)
    dg = (1.0 + r) / s  # d g / d r
    # d/dw*(g w* H_r) = g (H_r + r H_rr) + r dg H_r; the conjugate term is equal
    one = g * (h_r + r * h_rr) + r * dg * h_r
    return 0.25 * 2.0 * one


def spin_trivial(s, omega, beta, hbar=1.0) -> OrbitContribution:
    """Trivial orbit at w = 0 including the Solari-Kochetov correction."""
    h0 = spin_q_symbol(0j, s, omega, hbar)
    sk = solari_kochetov_integrand(0j, s, omega, hbar)
    # curvature of H/hbar in (Q, P) sets Tr M = 2 cosh(omega tau)
    return trivial_contribution(h0 - sk, omega**2, beta, hbar, h0=h0 - sk)


def spin_Z_sc(s, omega, beta, hbar=1.0):
    """exp(hbar omega beta (s + 1/2)) / (exp(hbar omega beta/2) - exp(-hbar omega beta/2))."""
    return assemble_trace([spin_trivial(s, omega, beta, hbar)], beta, "sc_spin")


# analytic thermodynamics of a trace formula

ContribFn = Callable[[float], Sequence[OrbitContribution]]


def _amp_derivs(contribs, beta, shifted: Optional[ContribFn], rel_step):
    """Per orbit: (d ln(TrM-2)/dbeta, d^2 ln(TrM-2)/dbeta^2, dH0/dbeta)."""
    need = [c for c in contribs if c.stability is None]
    plus = minus = {}
    h = rel_step * beta
    if need:
        if shifted is None:
            raise DomainError("non-trivial orbits need contributions at shifted beta")
        plus = {c.key: c for c in shifted(beta + h)}
        minus = {c.key: c for c in shifted(beta - h)}
    out = []
    for c in contribs:
        if c.stability is not None:
            out.append((c.dlog_amp(beta), c.d2log_amp(beta), 0.0))
            continue
        try:
            cp, cm = plus[c.key], minus[c.key]
        except KeyError:
            raise DomainError(f"orbit {c.key} does not persist at beta +- {h:g}") from None
        if c.singular or cp.singular or cm.singular:
            raise SingularAmplitudeError(f"orbit {c.key} has a singular amplitude")
        d1 = (cp.log_trm_m2 - cm.log_trm_m2) / (2 * h)
        d2 = (cp.log_trm_m2 - 2 * c.log_trm_m2 + cm.log_trm_m2) / (h * h)
        out.append((d1, d2, (cp.h0 - cm.h0) / (2 * h)))
    return out


def _weights(contribs):
    log_z = logsumexp(c.log_term for c in contribs)
    return log_z, [math.exp(c.log_term - log_z) for c in contribs]


def u_sc_analytic(contribs, beta, shifted: Optional[ContribFn] = None, rel_step=1e-4):
    """u = (1/Z) sum_j Z_j {H0_j + (1/2) d/dbeta ln(Tr M_j - 2)}."""
    assemble_trace(contribs, beta)  # raises on singular amplitudes
    derivs = _amp_derivs(contribs, beta, shifted, rel_step)
    _, w = _weights(contribs)
    return sum(wj * (c.h0 + 0.5 * d[0]) for wj, c, d in zip(w, contribs, derivs))


def c_sc_analytic(contribs, beta, shifted: Optional[ContribFn] = None, rel_step=1e-4, k_b=1.0):
    """Specific heat from the weighted sum over orbits.

    Written as k_B beta^2 [sum_j w_j (g_j - u)^2 - sum_j w_j (g_j' )], with
    g_j = H0_j + (1/2) d ln(Tr M_j - 2)/dbeta, which equals
    -k_B beta^2 u^2 + k_B beta^2 sum_j w_j [g_j^2 - (1/2) d^2 ln(Tr M_j - 2)]
    whenever H0_j does not depend on beta, without the cancellation.
    """
    assemble_trace(contribs, beta)
    derivs = _amp_derivs(contribs, beta, shifted, rel_step)
    _, w = _weights(contribs)
    g = [c.h0 + 0.5 * d[0] for c, d in zip(contribs, derivs)]
    u = sum(wj * gj for wj, gj in zip(w, g))
    var = sum(wj * (gj - u) ** 2 for wj, gj in zip(w, g))
    curv = sum(wj * (0.5 * d[1] + d[2]) for wj, d in zip(w, derivs))
    return k_b * beta * beta * (var - curv)
