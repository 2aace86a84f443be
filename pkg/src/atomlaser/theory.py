"""Closed-form Thomas-Fermi and phase-diffusion predictions.

These are the single-mode estimates the simulations are compared against:
chemical potentials of an isotropic condensate in the Thomas-Fermi limit,
and the energy uncertainty sqrt(N) dmu/dN produced by number fluctuations,
which bounds the laser linewidth from below.
"""

from __future__ import annotations

import cmath
import math

from .params import HBAR, ParameterError, PhysicalParams


def chemical_potential(params: PhysicalParams, dimension: int,
                       atom_number: float | None = None) -> float:
    """Thomas-Fermi chemical potential, J.

    Uses the trapped-species interaction U = 4 pi hbar^2 a11 / m, reduced by
    the transverse area (1D) or length (2D).  Scales as N^(2/3), N^(1/2) and
    N^(2/5) in 1, 2 and 3 dimensions.
    """
    n = params.atom_number if atom_number is None else atom_number
    if not n > 0:
        raise ParameterError("atom number must be positive")
    m = params.mass
    w2 = params.trap_frequency**2
    u = params.interaction_3d("11")
    if dimension == 1:
        area = params.reduction_factor(1)
        return 0.5 * m * w2 * (1.5 * n * u / (m * w2 * area))**(2.0 / 3.0)
    if dimension == 2:
        length = params.reduction_factor(2)
        return math.sqrt(u * m * w2 * n / (math.pi * length))
    if dimension == 3:
        return 0.5 * m * w2 * (15.0 * n * u / (4.0 * math.pi * m * w2))**0.4
    raise ParameterError(f"unsupported dimension {dimension}")


def phase_diffusion_limit(params: PhysicalParams, dimension: int,
                          atom_number: float | None = None) -> float:
    """Energy uncertainty sqrt(N) dmu/dN from number fluctuations, J.

    Closed forms of the derivative of the Thomas-Fermi chemical potential:
    proportional to N^(1/6) in 1D, independent of N in 2D, N^(-1/10) in 3D.
    A coherent condensate has number standard deviation sqrt(N); twice this
    energy uncertainty is the fundamental linewidth floor.
    """
    n = params.atom_number if atom_number is None else atom_number
    if not n > 0:
        raise ParameterError("atom number must be positive")
    m = params.mass
    w2 = params.trap_frequency**2
    a = params.scattering_length_11
    if dimension == 1:
        area = params.reduction_factor(1)
        return (m * w2 / 3.0) * (6.0 * math.pi * HBAR**2 * a
                                 / (m**2 * w2 * area))**(2.0 / 3.0) * n**(1.0 / 6.0)
    if dimension == 2:
        length = params.reduction_factor(2)
        return HBAR * params.trap_frequency * math.sqrt(a / length)
    if dimension == 3:
        return (m * w2 / 5.0) * (15.0 * HBAR**2 * a / (m**2 * w2))**0.4 * n**(-0.1)
    raise ParameterError(f"unsupported dimension {dimension}")


def predicted_peak_momentum(params: PhysicalParams, mu: float) -> float:
    """Beam peak wavenumber sqrt(k0^2 + 2 m mu / hbar^2), 1/m.

    Once the outcoupled atoms have rolled off the condensate mean field,
    their kinetic energy is the kick energy plus the chemical potential.
    """
    if mu < 0:
        raise ParameterError("chemical potential must be non-negative")
    return math.sqrt(params.kick_wavenumber**2
                     + 2.0 * params.mass * mu / HBAR**2)


def squeezed_number_stats(alpha: complex, r: float = 0.0,
                          theta: float = 0.0) -> tuple[float, float]:
    """Mean and variance of the particle number of a squeezed coherent state.

    mean = |alpha|^2 + sinh^2 r
    var  = |alpha cosh r - conj(alpha) e^{-i theta} sinh r|^2
           + 2 cosh^2 r sinh^2 r

    With r = 0 this reduces to Poisson statistics of a coherent state.
    """
    alpha = complex(alpha)
    ch, sh = math.cosh(r), math.sinh(r)
    mean = abs(alpha)**2 + sh * sh
    lin = alpha * ch - alpha.conjugate() * cmath.exp(-1j * theta) * sh
    var = abs(lin)**2 + 2.0 * ch * ch * sh * sh
    return mean, var
