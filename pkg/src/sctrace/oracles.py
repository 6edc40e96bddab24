"""Exact quantum and classical reference partition functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, special

from .errors import DomainError, NumericalFailure, TruncationError
from .model import Potential
from .semiclassical import ZResult, _lib

# a level sum stops once a term drops below this fraction of the partial sum
TRUNCATION = 1e-16


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest eigenvalues, ascending, with a per-level convergence estimate."""

    levels: tuple
    errors: tuple = ()
    domain: tuple = ()
    points: int = 0
    exact: bool = False

    def __len__(self):
        return len(self.levels)

    def below(self, energy):
        return sum(1 for e in self.levels if e < energy)


def _fd_levels(potential, hbar, L, n, k, vectors=False):
    # fourth-order five-point Laplacian, banded storage (lower form)
    x = np.linspace(-L, L, n + 2)[1:-1]
    h = x[1] - x[0]
    kin = hbar * hbar / (24.0 * h * h)
    band = np.empty((3, n))
    band[0] = 30.0 * kin + potential.V(x)
    band[1] = -16.0 * kin
    band[2] = kin
    return linalg.eig_banded(band, lower=True, eigvals_only=not vectors, select="i",
                             select_range=(0, k - 1))


def _initial_extent(potential, k, hbar):
    mins = potential.minima()
    lo, hi = min(mins), max(mins)
    w = math.sqrt(hbar / math.sqrt(max(potential.d2V(q) for q in mins)))
    return max(abs(lo), abs(hi)) + 4.0 * w


def grid_spectrum(potential: Potential, K, accuracy=1e-8, hbar=1.0, max_points=2**18):
    """Lowest K levels of -(hbar^2/2) d^2/dq^2 + V(q) on a finite-difference grid.

    The 5-point Laplacian error is O(h^4), so each grid pair (h, h/2) is
    Richardson-extrapolated; the grid is refined until successive extrapolated
    levels agree to ``accuracy``. The box half-width L is grown until
    V(+-L) >= E_{K-1} + 25 and the ground state has decayed to 1e-12 at the wall.
    """
    if K < 1:
        raise DomainError("K must be >= 1")
    L = _initial_extent(potential, K, hbar)
    n = 256
    while True:
        coarse = _fd_levels(potential, hbar, L, n, K)
        if min(potential.V(-L), potential.V(L)) < coarse[-1] + 25.0:
            L *= 1.25
            continue
        vals, vecs = _fd_levels(potential, hbar, L, n, 1, vectors=True)
        psi = np.abs(vecs[:, 0])
        if max(psi[0], psi[-1]) > 1e-12 * psi.max():
            L *= 1.25
            continue
        break

    prev = None
    fine = _fd_levels(potential, hbar, L, n, K)
    while True:
        if 2 * n > max_points:
            raise NumericalFailure("grid refinement budget exhausted",
                                   iterates=(prev, fine))
        coarse, fine = fine, _fd_levels(potential, hbar, L, 2 * n, K)
        n *= 2
        rich = (16.0 * fine - coarse) / 15.0
        if prev is not None:
            err = np.abs(rich - prev)
            if np.all(err < accuracy):
                return SpectrumResult(tuple(float(e) for e in rich),
                                      tuple(float(e) for e in err), (-L, L), n)
        prev = rich


def closed_form_spectrum(levels, exact=True):
    return SpectrumResult(tuple(float(e) for e in levels), (0.0,) * len(levels), exact=exact)


def _level_log_sum(energies, beta, complete=False):
    """ln sum exp(-beta E_n) over an ascending iterable, with the truncation rule."""
    it = iter(energies)
    try:
        e0 = next(it)
    except StopIteration:
        raise TruncationError("no levels") from None
    m = _lib(beta)
    total = 1
    for e in it:
        t = m.exp(-beta * (e - e0))
        total += t
        if t < TRUNCATION * total:
            break
    else:
        if not complete:
            raise TruncationError(
                f"level sum not converged at beta={float(beta):g}; request more levels"
            )
    return -beta * e0 + m.log(total)


def z_from_levels(levels: SpectrumResult, beta):
    """Z = sum_n exp(-beta E_n)."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    if len(levels) == 1:
        return ZResult("exact", beta, -beta * levels.levels[0])
    return ZResult("exact", beta, _level_log_sum(levels.levels, beta, complete=levels.exact))


def quartic_uv_levels(alpha, omega, hbar=1.0):
    """Generator of hbar omega (n + alpha + 1/2)^2, n = 0, 1, ..."""
    n = 0
    while True:
        yield hbar * omega * (n + alpha + 0.5) ** 2
        n += 1


def quartic_uv_exact_Z(alpha, omega, beta, hbar=1.0):
    """sum_n exp(-hbar omega beta (n + alpha + 1/2)^2)."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    return ZResult("exact", beta, _level_log_sum(quartic_uv_levels(alpha, omega, hbar), beta))


def log_erfc(x):
    """ln erfc(x), via the scaled complementary function for large x."""
    if x < 0.5:
        return math.log(special.erfc(x))
    return math.log(special.erfcx(x)) - x * x


def quartic_uv_classical_Z(alpha, omega, beta, hbar=1.0):
    """sqrt(pi) / (2 sqrt(hbar omega beta)) [1 - erf(sqrt(hbar omega beta) alpha)]."""
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    y = hbar * omega * beta
    x = math.sqrt(y) * alpha
    log_z = 0.5 * math.log(math.pi) - math.log(2.0) - 0.5 * math.log(y) + log_erfc(x)
    return ZResult("classical", beta, log_z)


def classical_Z_euclidean(potential: Potential, beta, hbar=1.0):
    """[1/(hbar sqrt(2 pi beta))] int exp(-beta V(q)) dq."""
    mins = potential.minima()
    vmin = min(potential.V(q) for q in mins)
    cut = -math.log(TRUNCATION)

    def edge(q0, direction):
        step = max(1.0, abs(q0))
        q = q0
        for _ in range(200):
            q += direction * step
            if beta * (potential.V(q) - vmin) >= cut:
                return q
            step *= 1.5
        raise NumericalFailure("could not bound the Boltzmann factor")

    lo, hi = edge(min(mins), -1.0), edge(max(mins), 1.0)
    f = lambda q: math.exp(-beta * (potential.V(q) - vmin))  # noqa: E731
    pts = sorted(q for q in potential.critical_points() if lo < q < hi)
    val, _ = integrate.quad(f, lo, hi, points=pts, epsabs=0.0, epsrel=1e-12, limit=500)
    if not val > 0:
        raise NumericalFailure("non-positive configuration integral")
    log_z = -beta * vmin + math.log(val) - math.log(hbar * math.sqrt(2.0 * math.pi * beta))
    return ZResult("classical", beta, log_z)


def spin_levels(s, omega, hbar=1.0):
    """Eigenvalues hbar omega m, m = -s..s, ascending."""
    count = int(round(2 * s)) + 1
    return [hbar * omega * (-s + n) for n in range(count)]


def spin_exact_Z(s, omega, beta, hbar=1.0):
    """sinh(hbar omega beta (s + 1/2)) / sinh(hbar omega beta / 2)."""
    x = hbar * omega * beta
    # ln of [e^{x(s+1/2)} - e^{-x(s+1/2)}] / [e^{x/2} - e^{-x/2}]
    log_z = x * s + math.log(-math.expm1(-x * (2 * s + 1))) - math.log(-math.expm1(-x))
    return ZResult("exact", beta, log_z)
