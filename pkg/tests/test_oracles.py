import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from sctrace import oracles
from sctrace.errors import DomainError, TruncationError
from sctrace.model import DoubleWell, Potential, build_potential


@pytest.fixture(scope="module")
def deep_levels(deep):
    return oracles.grid_spectrum(deep, 11)


@pytest.fixture(scope="module")
def shallow_levels(shallow):
    return oracles.grid_spectrum(shallow, 11)


class TestGridSpectrum:
    def test_harmonic(self, oscillator):
        sp = oracles.grid_spectrum(oscillator, 12)
        np.testing.assert_allclose(sp.levels, np.arange(12) + 0.5, atol=1e-8)
        assert max(sp.errors) < 1e-8

    def test_scaled_hbar(self):
        # V = q^2 / 2 with hbar = 0.5 gives hbar (n + 1/2)
        sp = oracles.grid_spectrum(Potential([0, 0, 0.5]), 4, hbar=0.5)
        np.testing.assert_allclose(sp.levels, 0.5 * (np.arange(4) + 0.5), atol=1e-8)

    def test_deep_double_well(self, deep_levels):
        # frozen from an independent 160-state oscillator-basis diagonalization
        assert deep_levels.levels[0] == pytest.approx(0.4793837, abs=1e-7)
        assert deep_levels.levels[1] == pytest.approx(0.4793845, abs=1e-7)
        assert deep_levels.below(3.0) == 8

    def test_deep_doublets(self, deep_levels):
        lv = deep_levels.levels
        splits = [lv[2 * k + 1] - lv[2 * k] for k in range(4)]
        gaps = [lv[2 * k + 2] - lv[2 * k + 1] for k in range(3)]
        assert max(splits) < min(gaps)

    def test_shallow_double_well(self, shallow_levels):
        assert shallow_levels.below(0.15) == 2

    def test_strictly_increasing_and_above_minimum(self, deep_levels):
        lv = deep_levels.levels
        assert all(b > a for a, b in zip(lv, lv[1:]))
        assert lv[0] > 0.0

    def test_weak_anharmonicity(self):
        # Rayleigh-Schroedinger series for q^2/2 + g q^4, truncation ~ 240 g^4
        g = 1e-3
        series = 0.5 + 0.75 * g - 21 / 8 * g**2 + 333 / 16 * g**3
        sp = oracles.grid_spectrum(Potential([0, 0, 0.5, 0, g]), 1)
        assert sp.levels[0] == pytest.approx(series, abs=1e-8)

    def test_invalid_k(self, oscillator):
        with pytest.raises(DomainError):
            oracles.grid_spectrum(oscillator, 0)


class TestLevelSums:
    @pytest.mark.parametrize("beta", [0.5, 2.0, 30.0])
    def test_harmonic_levels(self, beta):
        sp = oracles.closed_form_spectrum([n + 0.5 for n in range(200)])
        with mpmath.workdps(30):
            expected = float(1 / (2 * mpmath.sinh(beta / 2)))
        assert oracles.z_from_levels(sp, beta).z == pytest.approx(expected, rel=1e-10)

    def test_single_level(self):
        sp = oracles.SpectrumResult((1.3,))
        assert oracles.z_from_levels(sp, 2.0).log_z == -2.6

    def test_truncation_error(self):
        sp = oracles.SpectrumResult(tuple(n + 0.5 for n in range(10)))
        with pytest.raises(TruncationError):
            oracles.z_from_levels(sp, 0.01)

    def test_monotone_in_beta(self, deep_levels):
        zs = [oracles.z_from_levels(deep_levels, b).log_z for b in (15.0, 20.0, 40.0, 80.0)]
        assert all(b < a for a, b in zip(zs, zs[1:]))


class TestQuarticOracles:
    def test_dominance(self):
        z = oracles.quartic_uv_exact_Z(8.0, 1.0, 1.0)
        assert z.log_z == pytest.approx(-72.25 + math.log1p(math.exp(-18.0)), rel=1e-15)

    def test_ground_state_limit(self):
        assert oracles.quartic_uv_exact_Z(8.0, 1.0, 40.0).log_z == pytest.approx(-40 * 72.25, rel=1e-15)

    def test_level_order(self):
        gen = oracles.quartic_uv_levels(0.3, 2.0)
        lv = [next(gen) for _ in range(20)]
        assert all(b > a for a, b in zip(lv, lv[1:]))

    def test_classical_alpha_zero(self):
        y = 0.7
        assert oracles.quartic_uv_classical_Z(0.0, 1.0, y).z == pytest.approx(
            math.sqrt(math.pi) / (2 * math.sqrt(y)), rel=1e-14)

    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0, 26.0, 300.0])
    def test_log_erfc(self, x):
        with mpmath.workdps(40):
            expected = float(mpmath.log(mpmath.erfc(x)))
        assert oracles.log_erfc(x) == pytest.approx(expected, rel=1e-12)

    def test_large_argument_asymptote(self):
        y, alpha = 50.0, 8.0
        x = math.sqrt(y) * alpha
        asym = 0.5 * math.log(math.pi) - math.log(2 * math.sqrt(y)) - x * x - math.log(x * math.sqrt(math.pi))
        assert oracles.quartic_uv_classical_Z(alpha, 1.0, y).log_z == pytest.approx(asym, rel=1e-6)

    def test_phase_space_quadrature(self):
        alpha, beta = 2.0, 1.0
        f = lambda p, q: math.exp(-beta * (0.5 * (q * q + p * p) + alpha) ** 2)  # noqa: E731
        val, _ = integrate.dblquad(f, -6, 6, -6, 6, epsabs=0, epsrel=1e-11)
        assert oracles.quartic_uv_classical_Z(alpha, 1.0, beta).z == pytest.approx(
            val / (2 * math.pi), rel=1e-6)

    def test_classical_approaches_exact_at_high_temperature(self):
        betas = [0.01, 0.003, 0.001, 0.0003, 0.0001]
        errs = [abs(math.expm1(oracles.quartic_uv_classical_Z(8.0, 1.0, b).log_z
                               - oracles.quartic_uv_exact_Z(8.0, 1.0, b).log_z)) for b in betas]
        assert all(b < a for a, b in zip(errs, errs[1:]))


class TestClassicalEuclidean:
    @pytest.mark.parametrize("omega,beta", [(1.0, 1.0), (2.0, 0.3), (0.5, 7.0)])
    def test_harmonic(self, omega, beta):
        V = Potential([0, 0, 0.5 * omega**2])
        assert oracles.classical_Z_euclidean(V, beta).z == pytest.approx(1 / (omega * beta), rel=1e-10)

    def test_laplace_limit(self, deep):
        beta = 400.0
        lap = 2.0 / (math.sqrt(0.96) * beta)
        assert oracles.classical_Z_euclidean(deep, beta).z == pytest.approx(lap, rel=1e-2)

    def test_exceeds_single_minimum(self, shallow):
        beta = 30.0
        single = 1.0 / (math.sqrt(shallow.d2V(5.0)) * beta)
        assert oracles.classical_Z_euclidean(shallow, beta).z > single


class TestSpinOracle:
    def test_half(self):
        assert oracles.spin_exact_Z(0.5, 1.0, 1.3).z == pytest.approx(2 * math.cosh(0.65), rel=1e-14)

    def test_high_temperature(self):
        assert oracles.spin_exact_Z(3.0, 1.0, 1e-9).z == pytest.approx(7.0, rel=1e-7)

    @pytest.mark.parametrize("s", [0.5, 1.5, 7, 25, 50])
    @pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
    def test_closed_form_vs_sum(self, s, beta):
        lv = oracles.spin_levels(s, 1.0)
        direct = math.log(math.fsum(math.exp(-beta * (e - lv[0])) for e in lv)) - beta * lv[0]
        assert oracles.spin_exact_Z(s, 1.0, beta).log_z == pytest.approx(direct, rel=1e-12)
