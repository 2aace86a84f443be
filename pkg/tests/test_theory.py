"""Closed-form predictions against independent oracles.

Expected values below were frozen from a 40-digit mpmath evaluation of the
same formulas, done separately from the package code; finite-difference
oracles are recomputed in-test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from atomlaser.params import HBAR, ParameterError, PhysicalParams
from atomlaser.theory import (chemical_potential, phase_diffusion_limit,
                              predicted_peak_momentum, squeezed_number_stats)


def make_params(a=1e-9, omega=250.0, n=1e7, area=1.2e-11, length=3.46e-6):
    return PhysicalParams.single_species(
        mass=1.443e-25, trap_frequency=omega, scattering_length=a,
        atom_number=n, transverse_area=area, transverse_length=length)


FIG4 = make_params()


class TestChemicalPotential:
    def test_frozen_1d_value(self):
        # mpmath oracle: 1.18219567322e-29 J
        mu = chemical_potential(FIG4, 1)
        assert mu == pytest.approx(1.18219567322e-29, rel=1e-9)

    def test_scaling_exponent_1d_exact(self):
        mu1 = chemical_potential(FIG4, 1, atom_number=1e7)
        mu8 = chemical_potential(FIG4, 1, atom_number=8e7)
        assert mu8 / mu1 == pytest.approx(4.0, rel=1e-12)

    def test_noninteracting_limit(self):
        p = make_params(a=0.0)
        for d in (1, 2, 3):
            assert chemical_potential(p, d) == 0.0

    def test_missing_reduction_factor(self):
        p = PhysicalParams.single_species(
            mass=1.443e-25, trap_frequency=250.0, scattering_length=1e-9,
            atom_number=1e5)
        with pytest.raises(ParameterError):
            chemical_potential(p, 1)
        with pytest.raises(ParameterError):
            chemical_potential(p, 2)
        chemical_potential(p, 3)  # 3D needs no factor

    @given(st.floats(1e4, 1e8), st.integers(1, 3))
    def test_strictly_increasing_in_n(self, n, d):
        lo = chemical_potential(FIG4, d, atom_number=n)
        hi = chemical_potential(FIG4, d, atom_number=n * 1.01)
        assert hi > lo > 0


class TestPhaseDiffusionLimit:
    def test_frozen_1d_value(self):
        # mpmath oracle 2.49228731157e-33 J; also equals (2/3) mu / sqrt(N)
        de = phase_diffusion_limit(FIG4, 1)
        assert de == pytest.approx(2.49228731157e-33, rel=1e-9)
        mu = chemical_potential(FIG4, 1)
        assert de == pytest.approx((2.0 / 3.0) * mu / math.sqrt(1e7), rel=1e-12)

    def test_frozen_2d_value(self):
        # mpmath oracle for hbar*w*sqrt(a/l) at w=2000, a=1e-8, l=3.46e-6
        p = make_params(a=1e-8, omega=2000.0)
        assert phase_diffusion_limit(p, 2) == pytest.approx(1.13388264229e-32,
                                                            rel=1e-9)

    def test_2d_independent_of_n(self):
        a = phase_diffusion_limit(FIG4, 2, atom_number=1e5)
        b = phase_diffusion_limit(FIG4, 2, atom_number=1e7)
        assert a == b

    @pytest.mark.parametrize("dimension", [1, 2, 3])
    @pytest.mark.parametrize("n", [1e4, 1e5, 1e6, 1e7, 1e8])
    def test_matches_finite_difference(self, dimension, n):
        # independent oracle: centered finite difference of the chemical potential
        h = n * 1e-6
        dmu = (chemical_potential(FIG4, dimension, n + h)
               - chemical_potential(FIG4, dimension, n - h)) / (2 * h)
        oracle = math.sqrt(n) * dmu
        assert phase_diffusion_limit(FIG4, dimension, n) == pytest.approx(
            oracle, rel=1e-6)

    def test_scaling_exponents_exact(self):
        # analytic log-log slope over a decade
        for d, expect in ((1, 1.0 / 6.0), (3, -0.1)):
            lo = phase_diffusion_limit(FIG4, d, atom_number=1e5)
            hi = phase_diffusion_limit(FIG4, d, atom_number=1e6)
            slope = math.log10(hi / lo)
            assert abs(slope - expect) < 1e-9


class TestPredictedPeakMomentum:
    def test_frozen_value(self):
        p = make_params()
        p = PhysicalParams.single_species(
            mass=1.443e-25, trap_frequency=250.0, scattering_length=1e-9,
            atom_number=1e7, kick_wavenumber=1e7, transverse_area=1.2e-11)
        # mpmath oracle at mu = 1.18e-29 J exactly
        assert predicted_peak_momentum(p, 1.18e-29) == pytest.approx(
            2.0154768265e7, rel=1e-9)

    def test_zero_mu(self):
        p = PhysicalParams.single_species(
            mass=1.443e-25, trap_frequency=250.0, scattering_length=1e-9,
            atom_number=1e7, kick_wavenumber=3e6)
        assert predicted_peak_momentum(p, 0.0) == pytest.approx(3e6, rel=1e-15)

    def test_zero_kick(self):
        p = PhysicalParams.single_species(
            mass=1.443e-25, trap_frequency=250.0, scattering_length=1e-9,
            atom_number=1e7)
        mu = 2.3e-30
        expect = math.sqrt(2 * p.mass * mu) / HBAR
        assert predicted_peak_momentum(p, mu) == pytest.approx(expect, rel=1e-12)


class TestSqueezedNumberStats:
    def test_paper_variance_reduction(self):
        # r = ln 2 gives var(N) = N/4 plus the small spontaneous part
        n = 1e6
        mean, var = squeezed_number_stats(math.sqrt(n), r=math.log(2.0))
        extra = 2.0 * math.cosh(math.log(2))**2 * math.sinh(math.log(2))**2
        assert var == pytest.approx(n / 4.0 + extra, rel=1e-12)
        assert var / n == pytest.approx(0.25, rel=1e-4)
        assert mean == pytest.approx(n + math.sinh(math.log(2))**2, rel=1e-12)

    def test_squeezed_vacuum_frozen(self):
        mean, var = squeezed_number_stats(0.0, r=math.log(2.0))
        assert mean == pytest.approx(0.5625, abs=1e-12)   # sinh^2(ln 2) = 9/16
        assert var == pytest.approx(1.7578125, abs=1e-12)  # 2 cosh^2 sinh^2

    @given(st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                              allow_infinity=False))
    def test_r_zero_is_coherent(self, alpha):
        mean, var = squeezed_number_stats(alpha, r=0.0, theta=0.3)
        assert mean == pytest.approx(abs(alpha)**2, rel=1e-12, abs=1e-15)
        assert var == pytest.approx(abs(alpha)**2, rel=1e-12, abs=1e-15)

    @given(st.floats(0, 2 * math.pi), st.floats(0, 1.5))
    def test_variance_bounds(self, theta, r):
        # linear term bounded by |alpha|^2 e^{+-2r}
        alpha = 30.0
        _, var = squeezed_number_stats(alpha, r=r, theta=theta)
        lin = var - 2 * math.cosh(r)**2 * math.sinh(r)**2
        assert alpha**2 * math.exp(-2 * r) - 1e-9 <= lin <= alpha**2 * math.exp(2 * r) + 1e-9
