"""Physical parameters, spatial grids and harmonic-oscillator units.

Everything at the API boundary is SI.  Integration happens in trap units
(length sqrt(hbar/m w), time 1/w, energy hbar*w), which conditions the
stepper; the conversion is exact and is exercised by the unit tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

HBAR = 1.054571817e-34  # J s

#: mass used by the shipped reproduction configs (a common alkali BEC species)
DEFAULT_MASS = 1.443e-25  # kg


class ParameterError(ValueError):
    """Inconsistent or incomplete physical parameters / grid geometry."""


@dataclass(frozen=True)
class PhysicalParams:
    """Two-level atom-laser parameters.

    The trapped component sits in an isotropic harmonic trap; the untrapped
    component is free apart from the mean field and receives a momentum kick
    ``kick_wavenumber`` along ``kick_direction`` from the outcoupler.  The
    single-beam light shifts are spatially constant, so only their difference
    matters: it is folded into ``detuning``.

    Interactions are s-wave, U_ij = 4 pi hbar^2 a_ij / m, divided by a
    transverse area (1D) or transverse length (2D) on dimensional reduction.
    """

    mass: float                      # kg
    trap_frequency: float            # rad/s
    scattering_length_11: float      # m, trapped-trapped
    scattering_length_22: float      # m, untrapped-untrapped
    scattering_length_12: float      # m, cross
    atom_number: float
    rabi_frequency: complex = 0.0    # rad/s, two-photon; complex phase allowed
    detuning: float = 0.0            # rad/s, effective two-photon
    kick_wavenumber: float = 0.0     # 1/m
    kick_direction: tuple[float, float] = (0.0, 1.0)   # 2D only; unit vector
    transverse_area: float | None = None               # m^2, for 1D reduction
    transverse_length: float | None = None             # m, for 2D reduction
    squeeze_r: float = 0.0
    squeeze_theta: float = 0.0       # rad

    def __post_init__(self):
        if not (self.mass > 0):
            raise ParameterError("mass must be positive")
        if not (self.trap_frequency > 0):
            raise ParameterError("trap frequency must be positive")
        if not (self.atom_number > 0):
            raise ParameterError("atom number must be positive")
        for name in ("scattering_length_11", "scattering_length_22",
                     "scattering_length_12"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")
        if self.transverse_area is not None and not (self.transverse_area > 0):
            raise ParameterError("transverse area must be positive")
        if self.transverse_length is not None and not (self.transverse_length > 0):
            raise ParameterError("transverse length must be positive")
        if self.kick_wavenumber < 0:
            raise ParameterError("kick wavenumber is a magnitude, must be >= 0")
        norm = math.hypot(*self.kick_direction)
        if not norm > 0:
            raise ParameterError("kick direction must be a nonzero vector")
        if abs(norm - 1.0) > 1e-12:
            object.__setattr__(self, "kick_direction",
                               (self.kick_direction[0] / norm,
                                self.kick_direction[1] / norm))

    @classmethod
    def single_species(cls, mass, trap_frequency, scattering_length,
                       atom_number, **kwargs):
        """All three scattering lengths equal, the common reproduction case."""
        return cls(mass=mass, trap_frequency=trap_frequency,
                   scattering_length_11=scattering_length,
                   scattering_length_22=scattering_length,
                   scattering_length_12=scattering_length,
                   atom_number=atom_number, **kwargs)

    def scattering_length(self, pair: str) -> float:
        return {"11": self.scattering_length_11,
                "22": self.scattering_length_22,
                "12": self.scattering_length_12}[pair]

    def interaction_3d(self, pair: str = "11") -> float:
        """Bare three-dimensional interaction strength, J m^3."""
        return 4.0 * math.pi * HBAR**2 * self.scattering_length(pair) / self.mass

    def reduction_factor(self, dimension: int) -> float:
        """Transverse area (1D) or length (2D) used in dimensional reduction."""
        if dimension == 1:
            if self.transverse_area is None:
                raise ParameterError("1D reduction requires transverse_area")
            return self.transverse_area
        if dimension == 2:
            if self.transverse_length is None:
                raise ParameterError("2D reduction requires transverse_length")
            return self.transverse_length
        if dimension == 3:
            return 1.0
        raise ParameterError(f"unsupported dimension {dimension}")

    def interaction(self, dimension: int, pair: str = "11") -> float:
        """Reduced interaction strength: J m^d for a d-dimensional field."""
        if self.scattering_length(pair) == 0.0:
            return 0.0      # noninteracting: no reduction factor needed
        return self.interaction_3d(pair) / self.reduction_factor(dimension)

    @property
    def units(self) -> "HarmonicUnits":
        return HarmonicUnits.from_params(self)


@dataclass(frozen=True)
class HarmonicUnits:
    """Trap (harmonic-oscillator) unit system: exact SI scale factors."""

    length: float   # m
    time: float     # s
    energy: float   # J

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "HarmonicUnits":
        return cls.from_mass_frequency(params.mass, params.trap_frequency)

    @classmethod
    def from_mass_frequency(cls, mass: float, omega: float) -> "HarmonicUnits":
        return cls(length=math.sqrt(HBAR / (mass * omega)),
                   time=1.0 / omega,
                   energy=HBAR * omega)

    @property
    def wavenumber(self) -> float:
        return 1.0 / self.length

    @property
    def frequency(self) -> float:
        return 1.0 / self.time


def _as_tuple(value, dimension, cast):
    if np.isscalar(value):
        return (cast(value),) * dimension
    out = tuple(cast(v) for v in value)
    if len(out) != dimension:
        raise ParameterError(f"expected {dimension} per-axis values, got {len(out)}")
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice with its FFT-ordered momentum lattice.

    ``origin_fraction`` places x = 0 (the trap centre) as a fraction of the
    extent from the lower edge, so a beam travelling one way gets most of the
    box.  The discrete pairing dv * dv_k * prod(points) = (2 pi)^d holds
    exactly.
    """

    dimension: int
    points: tuple[int, ...]
    extents: tuple[float, ...]                 # m, per axis
    origin_fraction: tuple[float, ...] = None  # defaults to centred

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ParameterError("grid dimension must be 1 or 2")
        object.__setattr__(self, "points",
                           _as_tuple(self.points, self.dimension, int))
        object.__setattr__(self, "extents",
                           _as_tuple(self.extents, self.dimension, float))
        frac = self.origin_fraction if self.origin_fraction is not None else 0.5
        object.__setattr__(self, "origin_fraction",
                           _as_tuple(frac, self.dimension, float))
        for n in self.points:
            if n < 2 or n & (n - 1):
                raise ParameterError(f"points per axis must be a power of two, got {n}")
        for ext in self.extents:
            if not ext > 0:
                raise ParameterError("grid extent must be positive")
        for f in self.origin_fraction:
            if not 0.0 < f < 1.0:
                raise ParameterError("origin fraction must lie strictly inside (0, 1)")

    @classmethod
    def one_d(cls, points, extent, origin_fraction=0.5):
        return cls(dimension=1, points=points, extents=extent,
                   origin_fraction=origin_fraction)

    @classmethod
    def two_d(cls, points, extents, origin_fraction=0.5):
        return cls(dimension=2, points=points, extents=extents,
                   origin_fraction=origin_fraction)

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple(ext / n for ext, n in zip(self.extents, self.points))

    @cached_property
    def volume_element(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def momentum_volume_element(self) -> float:
        return float(np.prod([2.0 * math.pi / ext for ext in self.extents]))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """Position samples per axis; x = 0 sits at the trap centre."""
        out = []
        for n, dx, f in zip(self.points, self.spacing, self.origin_fraction):
            i0 = round(f * n)
            out.append((np.arange(n) - i0) * dx)
        return tuple(out)

    @cached_property
    def k_axes(self) -> tuple[np.ndarray, ...]:
        """Momentum samples per axis in standard FFT ordering, 1/m."""
        return tuple(2.0 * math.pi * np.fft.fftfreq(n, d=dx)
                     for n, dx in zip(self.points, self.spacing))

    def position_mesh(self) -> tuple[np.ndarray, ...]:
        """Open (broadcastable) position meshes."""
        return tuple(np.reshape(ax, self._axis_shape(i))
                     for i, ax in enumerate(self.axes))

    def k_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.reshape(ax, self._axis_shape(i))
                     for i, ax in enumerate(self.k_axes))

    def k_squared(self) -> np.ndarray:
        out = np.zeros(self.points)
        for ax in self.k_mesh():
            out = out + ax**2
        return out

    def _axis_shape(self, i):
        return tuple(-1 if j == i else 1 for j in range(self.dimension))

    def scaled(self, unit_length: float) -> "Grid":
        """Same lattice with lengths divided by ``unit_length``."""
        return Grid(dimension=self.dimension, points=self.points,
                    extents=tuple(e / unit_length for e in self.extents),
                    origin_fraction=self.origin_fraction)

    def describe(self) -> dict:
        """Plain-dict metadata, used by checkpoints and output headers."""
        return {"dimension": self.dimension,
                "points": list(self.points),
                "extents_m": list(self.extents),
                "origin_fraction": list(self.origin_fraction)}
