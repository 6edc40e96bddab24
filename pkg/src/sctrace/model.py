"""System descriptions, temperatures and coherent-state variables.

Units default to hbar = k_B = m = 1. The mass is fixed to one throughout, so a
potential-bearing system is fully described by V(q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, UnsupportedDegeneracyError, UnsupportedVariantError

# curvature below this is treated as a degenerate critical point
DEGENERACY_TOL = 1e-10


def _check_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class PolynomialWell:
    """V(q) = sum_k coeffs[k] q**k (ascending powers, energy units)."""

    coeffs: tuple
    hbar: float = 1.0
    k_b: float = 1.0

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        while len(c) > 1 and c[-1] == 0.0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)
        degree = len(c) - 1
        if degree < 2 or degree % 2:
            raise DomainError(f"potential degree must be even and >= 2, got {degree}")
        if c[-1] <= 0:
            raise DomainError("leading coefficient must be positive (confining potential)")
        _check_positive("hbar", self.hbar)
        _check_positive("k_b", self.k_b)


@dataclass(frozen=True)
class DoubleWell:
    """V(q) = delta_e [(q/a)^4 - 2 (q/a)^2 + 1], minima at q = +-a."""

    delta_e: float
    a: float
    hbar: float = 1.0
    k_b: float = 1.0

    def __post_init__(self):
        _check_positive("delta_e", self.delta_e)
        _check_positive("a", self.a)
        _check_positive("hbar", self.hbar)
        _check_positive("k_b", self.k_b)

    @property
    def coeffs(self):
        de, a = self.delta_e, self.a
        return (de, 0.0, -2.0 * de / a**2, 0.0, de / a**4)


@dataclass(frozen=True)
class QuarticUV:
    """H = hbar omega (u v + alpha)^2, with alpha = lambda / (hbar omega)."""

    alpha: float
    omega: float = 1.0
    hbar: float = 1.0
    k_b: float = 1.0

    def __post_init__(self):
        _check_positive("alpha", self.alpha)
        _check_positive("omega", self.omega)
        _check_positive("hbar", self.hbar)
        _check_positive("k_b", self.k_b)


@dataclass(frozen=True)
class SpinField:
    """Spin s in a uniform field, H = omega S_z."""

    s: float
    omega: float = 1.0
    hbar: float = 1.0
    k_b: float = 1.0

    def __post_init__(self):
        twice = 2.0 * self.s
        if not (twice >= 1 and abs(twice - round(twice)) < 1e-12):
            raise DomainError(f"2s must be a positive integer, got s={self.s!r}")
        object.__setattr__(self, "s", round(twice) / 2.0)
        _check_positive("omega", self.omega)
        _check_positive("hbar", self.hbar)
        _check_positive("k_b", self.k_b)

    @property
    def multiplicity(self):
        return int(round(2 * self.s)) + 1


SystemSpec = Union[PolynomialWell, DoubleWell, QuarticUV, SpinField]


def harmonic(omega=1.0, hbar=1.0, k_b=1.0) -> PolynomialWell:
    """Shorthand for V = omega^2 q^2 / 2."""
    return PolynomialWell((0.0, 0.0, 0.5 * omega**2), hbar=hbar, k_b=k_b)


@dataclass(frozen=True)
class Temperature:
    """Inverse temperature beta with derived tau = hbar beta and T."""

    beta: float
    hbar: float = 1.0
    k_b: float = 1.0

    def __post_init__(self):
        _check_positive("beta", self.beta)

    @classmethod
    def from_t(cls, t, hbar=1.0, k_b=1.0):
        _check_positive("T", t)
        return cls(1.0 / (k_b * t), hbar, k_b)

    @property
    def tau(self):
        return self.hbar * self.beta

    @property
    def t(self):
        return 1.0 / (self.k_b * self.beta)

    def reduced(self, omega):
        """k_B T / (hbar omega)."""
        return 1.0 / (self.beta * self.hbar * omega)


class Potential:
    """Polynomial potential with exact first and second derivatives."""

    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.d1 = P.polyder(self.coeffs)
        self.d2 = P.polyder(self.coeffs, 2)
        self._c = tuple(float(x) for x in self.coeffs[::-1])
        self._c1 = tuple(float(x) for x in self.d1[::-1])
        self._c2 = tuple(float(x) for x in self.d2[::-1])

    # Horner in plain Python: these run inside the integrator's inner loop
    @staticmethod
    def _horner(c, q):
        acc = 0.0 * q
        for x in c:
            acc = acc * q + x
        return acc

    def V(self, q):
        return self._horner(self._c, q)

    def dV(self, q):
        return self._horner(self._c1, q)

    def d2V(self, q):
        return self._horner(self._c2, q)

    def jet(self, q):
        """(V, V', V'') at a scalar q in one pass."""
        v = d1 = d2 = 0.0
        for x in self._c:
            d2 = d2 * q + 2.0 * d1
            d1 = d1 * q + v
            v = v * q + x
        return v, d1, d2

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def critical_points(self):
        """Sorted real roots of V', each polished by Newton steps."""
        roots = P.polyroots(self.d1)
        scale = max(1.0, float(np.max(np.abs(roots)))) if len(roots) else 1.0
        real = sorted(float(r.real) for r in roots if abs(r.imag) <= 1e-7 * scale)
        out = []
        for q in real:
            for _ in range(8):
                h = self.d2V(q)
                if h == 0.0:
                    break
                step = self.dV(q) / h
                q -= step
                if abs(step) <= 1e-16 * max(1.0, abs(q)):
                    break
            if out and abs(q - out[-1]) <= 1e-9 * scale:
                raise UnsupportedDegeneracyError(f"repeated critical point near q={q:g}")
            out.append(q)
        for q in out:
            if abs(self.d2V(q)) < DEGENERACY_TOL:
                raise UnsupportedDegeneracyError(f"V''({q:g}) vanishes")
        return out

    def minima(self):
        return [q for q in self.critical_points() if self.d2V(q) > 0]

    def __repr__(self):
        return f"{type(self).__name__}({list(self.coeffs)})"


class DoubleWellPotential(Potential):
    """Factored evaluation so V(+-a) = 0 and V(0) = delta_e hold exactly."""

    def __init__(self, delta_e, a):
        self.delta_e = float(delta_e)
        self.a = float(a)
        de, a = self.delta_e, self.a
        super().__init__([de, 0.0, -2.0 * de / a**2, 0.0, de / a**4])

    def V(self, q):
        x = q / self.a
        w = x * x - 1.0
        return self.delta_e * w * w

    def dV(self, q):
        x = q / self.a
        return 4.0 * self.delta_e * x * (x * x - 1.0) / self.a

    def d2V(self, q):
        x = q / self.a
        return 4.0 * self.delta_e * (3.0 * x * x - 1.0) / self.a**2

    def jet(self, q):
        de, a = self.delta_e, self.a
        x = q / a
        x2 = x * x
        w = x2 - 1.0
        return de * w * w, 4.0 * de * x * w / a, 4.0 * de * (3.0 * x2 - 1.0) / (a * a)

    def critical_points(self):
        return [-self.a, 0.0, self.a]


def build_potential(spec: SystemSpec) -> Potential:
    """Return the potential record for a potential-bearing system."""
    if isinstance(spec, DoubleWell):
        return DoubleWellPotential(spec.delta_e, spec.a)
    if isinstance(spec, PolynomialWell):
        return Potential(spec.coeffs)
    raise UnsupportedVariantError(f"{type(spec).__name__} has no potential V(q)")


def fit_frequency(potential: Potential) -> float:
    """sqrt(V'') at the deepest minimum."""
    mins = potential.minima()
    q = min(mins, key=potential.V)
    return math.sqrt(potential.d2V(q))


def default_width(potential: Potential, hbar=1.0) -> float:
    """Coherent-state width b = sqrt(hbar / omega_fit)."""
    return math.sqrt(hbar / fit_frequency(potential))


def reference_omega(spec: SystemSpec) -> float:
    """Frequency used for reduced units (T* = k_B T / hbar omega)."""
    if isinstance(spec, (QuarticUV, SpinField)):
        return spec.omega
    return fit_frequency(build_potential(spec))


@dataclass(frozen=True)
class UVPoint:
    """Canonically conjugate coherent-state variables for one phase point."""

    u: complex
    v: complex
    b: float
    hbar: float = 1.0

    def to_qp(self):
        return qp_from_uv(self)


def uv_from_qp(q, p, b, hbar=1.0) -> UVPoint:
    """u = (q/b + i b p/hbar)/sqrt(2), v = (q/b - i b p/hbar)/sqrt(2)."""
    _check_positive("b", b)
    _check_positive("hbar", hbar)
    x = q / b
    y = b * p / hbar
    r = 1.0 / math.sqrt(2.0)
    return UVPoint(complex(x, y) * r, complex(x, -y) * r, b, hbar)


def qp_from_uv(point: UVPoint):
    """Inverse of :func:`uv_from_qp`."""
    s = math.sqrt(2.0)
    q = point.b * (point.u + point.v) / s
    p = point.hbar * (point.u - point.v) / (1j * point.b * s)
    return q.real, p.real


def uv_jacobian(b):
    """d(u, v)/d(q, p/hbar); its determinant is -i for every b."""
    _check_positive("b", b)
    r = 1.0 / math.sqrt(2.0)
    return np.array([[r / b, 1j * b * r], [r / b, -1j * b * r]])
