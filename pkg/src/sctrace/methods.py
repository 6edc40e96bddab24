"""Uniform access to every (system, method) pair as beta -> ThermoPoint."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from . import oracles, semiclassical as sc
from .errors import TruncationError, UnsupportedVariantError
from .model import (
    DoubleWell,
    PolynomialWell,
    QuarticUV,
    SpinField,
    SystemSpec,
    build_potential,
)
from .orbits import DEFAULT_N_MAX, DEFAULT_TRM_FLOOR
from .thermo import (
    ThermoPoint,
    harmonic_like,
    thermo_from_levels,
    thermo_from_Z,
)

METHODS = ("exact", "classical", "sc_harmonic", "sc_trace", "sc_higher")


@dataclass(frozen=True)
class OrbitOptions:
    n_max: int = DEFAULT_N_MAX
    trm_mode: str = "floored"
    trm_floor: float = DEFAULT_TRM_FLOOR


def supported(spec: SystemSpec, method: str) -> bool:
    if method == "sc_higher":
        return isinstance(spec, QuarticUV)
    if method == "classical":
        return not isinstance(spec, SpinField)
    return method in METHODS


class Evaluator:
    """Thermodynamics of one system by any supported method.

    Grid spectra are cached and extended on demand, so a temperature sweep
    pays for diagonalization once per level count.
    """

    def __init__(self, spec: SystemSpec, orbit_options: Optional[OrbitOptions] = None,
                 rel_step=1e-4):
        self.spec = spec
        self.opts = orbit_options or OrbitOptions()
        self.rel_step = rel_step
        self.hbar = spec.hbar
        self.k_b = spec.k_b
        self.potential = (build_potential(spec)
                          if isinstance(spec, (PolynomialWell, DoubleWell)) else None)
        self._spectrum = None

    # partition functions

    def contributions(self, beta, tunneling=True):
        spec, h = self.spec, self.hbar
        if isinstance(spec, QuarticUV):
            return [sc.quartic_uv_trivial(spec.alpha, spec.omega, beta, h)]
        if isinstance(spec, SpinField):
            return [sc.spin_trivial(spec.s, spec.omega, beta, h)]
        o = self.opts
        return sc.multiwell_contributions(self.potential, beta, h, n_max=o.n_max,
                                          trm_mode=o.trm_mode, trm_floor=o.trm_floor,
                                          tunneling=tunneling)

    def z(self, method, beta) -> sc.ZResult:
        spec, h = self.spec, self.hbar
        if not supported(spec, method):
            raise UnsupportedVariantError(f"method {method!r} is not defined for "
                                          f"{type(spec).__name__}")
        if method in ("sc_harmonic", "sc_trace"):
            contribs = self.contributions(beta, tunneling=method == "sc_trace")
            return sc.assemble_trace(contribs, beta, method)
        if method == "sc_higher":
            return sc.quartic_uv_Z_higher(spec.alpha, spec.omega, beta, h)
        if method == "classical":
            if isinstance(spec, QuarticUV):
                return oracles.quartic_uv_classical_Z(spec.alpha, spec.omega, beta, h)
            return oracles.classical_Z_euclidean(self.potential, beta, h)
        # exact
        if isinstance(spec, QuarticUV):
            return oracles.quartic_uv_exact_Z(spec.alpha, spec.omega, beta, h)
        if isinstance(spec, SpinField):
            return oracles.spin_exact_Z(spec.s, spec.omega, beta, h)
        return self._with_levels(lambda lv: oracles.z_from_levels(lv, beta))

    def spectrum(self, K=16, accuracy=1e-8):
        if self._spectrum is None or len(self._spectrum) < K:
            self._spectrum = oracles.grid_spectrum(self.potential, K, accuracy, self.hbar)
        return self._spectrum

    def levels(self, K):
        """Lowest K levels from closed forms or the grid."""
        spec = self.spec
        if isinstance(spec, QuarticUV):
            gen = oracles.quartic_uv_levels(spec.alpha, spec.omega, self.hbar)
            return oracles.closed_form_spectrum([next(gen) for _ in range(K)])
        if isinstance(spec, SpinField):
            lv = oracles.spin_levels(spec.s, spec.omega, self.hbar)
            return oracles.closed_form_spectrum(lv[:K])
        return oracles.SpectrumResult(*self._truncate(self.spectrum(K), K))

    @staticmethod
    def _truncate(sp, K):
        return (sp.levels[:K], sp.errors[:K], sp.domain, sp.points, sp.exact)

    def _with_levels(self, fn, K=16, K_max=1024):
        while True:
            try:
                return fn(self.spectrum(K))
            except TruncationError:
                if K >= K_max:
                    raise
                K *= 2

    # thermodynamics

    def point(self, method, beta) -> ThermoPoint:
        spec, h, kb = self.spec, self.hbar, self.k_b
        if not supported(spec, method):
            raise UnsupportedVariantError(f"method {method!r} is not defined for "
                                          f"{type(spec).__name__}")
        if method == "exact":
            if isinstance(spec, QuarticUV):
                lv = oracles.quartic_uv_levels(spec.alpha, spec.omega, h)
                return thermo_from_levels(lv, beta, kb, method)
            if isinstance(spec, SpinField):
                lv = oracles.spin_levels(spec.s, spec.omega, h)
                return thermo_from_levels(lv, beta, kb, method, complete=True)
            return self._with_levels(lambda sp: thermo_from_levels(sp.levels, beta, kb, method))
        if method == "classical":
            return thermo_from_Z(lambda b: self.z("classical", b), beta, kb, self.rel_step,
                                 method)
        if method == "sc_higher":
            base = harmonic_like(beta, h * spec.omega * spec.alpha**2,
                                 2.0 * h * spec.omega * spec.alpha, kb, method)
            l0, l1, l2 = sc.quartic_uv_higher_log_derivs(spec.alpha, spec.omega, beta, h)
            log_z = base.log_z + l0
            return replace(base, log_z=log_z, f=-log_z / beta, u=base.u - l1,
                           s=base.s - kb * beta * l1 + kb * l0, c=base.c + kb * beta**2 * l2)
        return self._trace_point(method, beta)

    def _trace_point(self, method, beta):
        kb = self.k_b
        tunneling = method == "sc_trace"
        contribs = self.contributions(beta, tunneling)
        z = sc.assemble_trace(contribs, beta, method)
        extra = (("Z_harmonic", z.subtotal("harmonic")), ("Z_tunneling", z.subtotal("tunneling")))
        if len(contribs) == 1 and contribs[0].stability is not None:
            c = contribs[0]
            p = harmonic_like(beta, c.h0, c.stability * self.hbar, kb, method)
            return replace(p, extra=extra)
        shifted = lambda b: self.contributions(b, tunneling)  # noqa: E731
        u = sc.u_sc_analytic(contribs, beta, shifted, self.rel_step)
        c = sc.c_sc_analytic(contribs, beta, shifted, self.rel_step, kb)
        f = -z.log_z / beta
        return ThermoPoint(1.0 / (kb * beta), beta, z.log_z, f, u, kb * beta * (u - f), c,
                           method, extra=extra)


def point(spec: SystemSpec, method: str, beta, orbit_options=None) -> ThermoPoint:
    """One-shot convenience wrapper around :class:`Evaluator`."""
    return Evaluator(spec, orbit_options).point(method, beta)


def is_finite_point(p: ThermoPoint) -> bool:
    return all(math.isfinite(v) for v in (p.log_z, p.f, p.u, p.s, p.c))
