"""Grid geometry, unit system and parameter validation."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from atomlaser.params import (HBAR, Grid, HarmonicUnits, ParameterError,
                              PhysicalParams)


def test_interaction_strengths():
    p = PhysicalParams.single_species(
        mass=1.443e-25, trap_frequency=250.0, scattering_length=1e-9,
        atom_number=1e5, transverse_area=1.2e-11, transverse_length=3.46e-6)
    u3 = 4 * math.pi * HBAR**2 * 1e-9 / 1.443e-25
    assert p.interaction_3d("12") == pytest.approx(u3, rel=1e-14)
    assert p.interaction(1) == pytest.approx(u3 / 1.2e-11, rel=1e-14)
    assert p.interaction(2) == pytest.approx(u3 / 3.46e-6, rel=1e-14)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        PhysicalParams.single_species(mass=-1, trap_frequency=1,
                                      scattering_length=0, atom_number=1)
    with pytest.raises(ParameterError):
        PhysicalParams.single_species(mass=1e-25, trap_frequency=1,
                                      scattering_length=0, atom_number=0)
    with pytest.raises(ParameterError):
        PhysicalParams.single_species(mass=1e-25, trap_frequency=1,
                                      scattering_length=0, atom_number=1,
                                      transverse_area=0.0)


def test_kick_direction_normalized():
    p = PhysicalParams.single_species(
        mass=1.443e-25, trap_frequency=250.0, scattering_length=1e-9,
        atom_number=1e5, kick_direction=(3.0, 4.0))
    assert math.hypot(*p.kick_direction) == pytest.approx(1.0, abs=1e-15)


def test_harmonic_units_roundtrip():
    u = HarmonicUnits.from_mass_frequency(1.443e-25, 250.0)
    assert u.length == pytest.approx(math.sqrt(HBAR / (1.443e-25 * 250.0)), rel=1e-15)
    assert u.energy == pytest.approx(HBAR * 250.0, rel=1e-15)
    # converting a length to trap units and back is exact
    x = 1.234e-5
    assert (x / u.length) * u.length == pytest.approx(x, rel=1e-15)


@given(st.integers(2, 12), st.floats(1e-6, 1e-2),
       st.floats(0.1, 0.9))
def test_grid_fourier_pairing_1d(log2n, extent, frac):
    g = Grid.one_d(2**log2n, extent, origin_fraction=frac)
    d = g.dimension
    lhs = g.volume_element * g.momentum_volume_element * np.prod(g.points)
    assert lhs == pytest.approx((2 * math.pi)**d, rel=1e-12)


@given(st.integers(2, 6), st.integers(2, 6), st.floats(1e-6, 1e-3),
       st.floats(1e-6, 1e-3))
def test_grid_fourier_pairing_2d(l2a, l2b, ea, eb):
    g = Grid.two_d((2**l2a, 2**l2b), (ea, eb))
    lhs = g.volume_element * g.momentum_volume_element * np.prod(g.points)
    assert lhs == pytest.approx((2 * math.pi)**2, rel=1e-12)


def test_momentum_lattice_symmetric_to_nyquist():
    g = Grid.one_d(64, 1e-4)
    k = np.sort(g.k_axes[0])
    # one Nyquist point, otherwise symmetric about zero
    assert np.sum(k == k.min()) == 1
    pos = k[k > 0]
    neg = -k[k < 0]
    assert np.allclose(np.sort(pos), np.sort(neg)[:pos.size])
    assert k.min() == pytest.approx(-math.pi / g.spacing[0], rel=1e-12)


def test_grid_validation():
    with pytest.raises(ParameterError):
        Grid.one_d(100, 1e-4)          # not a power of two
    with pytest.raises(ParameterError):
        Grid.one_d(64, -1.0)
    with pytest.raises(ParameterError):
        Grid.one_d(64, 1e-4, origin_fraction=1.0)
    with pytest.raises(ParameterError):
        Grid(dimension=3, points=8, extents=1.0)


def test_grid_origin_placement():
    g = Grid.one_d(128, 1e-3, origin_fraction=0.25)
    x = g.axes[0]
    assert x[round(0.25 * 128)] == pytest.approx(0.0, abs=1e-18)
    assert x[0] == pytest.approx(-0.25e-3, rel=1e-12)


def test_grid_scaled():
    g = Grid.one_d(64, 2e-4, origin_fraction=0.3)
    s = g.scaled(1e-6)
    assert s.extents[0] == pytest.approx(200.0, rel=1e-12)
    assert s.points == g.points
    assert s.origin_fraction == g.origin_fraction
